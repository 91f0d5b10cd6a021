"""Run configuration (JSON) with strict keys and echoed defaults."""
import copy
import json

from .diffusion import make_schedule
from .errors import ContractError, FormatError
from .training import TrainConfig

DEFAULTS = {
    "io_resolution": [32, 32],
    "ddim_steps": 100,
    "schedule": {"T": 100, "beta_start": 1e-4, "beta_end": 0.02},
    "encoder": "pool",
    "semantic_dim": 32,
    "seed": 7,
    "gamma": 0.5,
    "mode": "ll_only",
    "train": {"epochs": 200, "batch_size": 16, "learning_rate": 1e-3,
              "optimizer": "adam", "hidden": 128, "draws": 4},
}


def _merge(defaults, given, where):
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise FormatError(f"unknown config key(s) {unknown} in {where or 'top level'}")
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise FormatError(f"config key {where}{key} must be an object")
            out[key] = _merge(defaults[key], value, f"{where}{key}.")
        else:
            out[key] = value
    return out


def resolve_config(given=None):
    """Apply defaults to a (possibly partial) config mapping and validate it."""
    cfg = _merge(DEFAULTS, dict(given or {}), "")
    if cfg["encoder"] not in ("pool", "learned"):
        raise ContractError(f"encoder must be 'pool' or 'learned', got {cfg['encoder']!r}")
    if cfg["mode"] not in ("ll_only", "all_subbands"):
        raise ContractError(f"mode must be 'll_only' or 'all_subbands', got {cfg['mode']!r}")
    if len(cfg["io_resolution"]) != 2:
        raise ContractError("io_resolution must be [H, W]")
    cfg["io_resolution"] = [int(x) for x in cfg["io_resolution"]]
    return cfg


def load_config(path):
    try:
        with open(path) as f:
            given = json.load(f)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(given, dict):
        raise FormatError(f"{path}: config must be a JSON object")
    return resolve_config(given)


def schedule_from(cfg):
    s = cfg["schedule"]
    return make_schedule(s["T"], s["beta_start"], s["beta_end"])


def train_config_from(cfg):
    t = cfg["train"]
    return TrainConfig(epochs=t["epochs"], batch_size=t["batch_size"],
                       learning_rate=t["learning_rate"], seed=cfg["seed"],
                       schedule=schedule_from(cfg), optimizer=t["optimizer"],
                       hidden=t["hidden"], draws=t["draws"])
