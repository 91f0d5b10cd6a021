"""Wavelet-domain diffusion-autoencoder face morphing and vulnerability metrics."""
__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402
from .diffusion import (NoiseSchedule, ZeroDenoiser, ddim_decode, ddim_encode, ddim_step,  # noqa: E402
                        forward_noising, make_analytic_denoiser, make_schedule)
from .latent import (LatentPair, LearnedEncoder, PoolPyramidEncoder, encode_semantic,  # noqa: E402
                     interpolate_pair, lerp, preprocess_xi, slerp)
from .metrics import (MetricReport, RocCurve, ScoreSet, apcer_at_bpcer, auc,  # noqa: E402
                      bpcer_at_apcer, build_score_set, eer, embedding_similarity, psnr, roc, ssim)
from .pipeline import (ModelBundle, MorphRequest, batch_morph, reconstruct,  # noqa: E402
                       wavelet_morph, zero_bundle)
from .toydata import make_toy_dataset  # noqa: E402
from .training import TrainConfig, TrainableDenoiser, train_denoiser  # noqa: E402
from .wavelet import SubBands, average_subbands, dwt_haar, dwt_multilevel, iwt_haar  # noqa: E402
