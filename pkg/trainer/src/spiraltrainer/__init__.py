"""Self-supervised inpainting trainer; exports PMF1 probability maps."""

from .formats import load_manifest, read_pgm, read_probmap, reveal_mask, write_probmap
from .losses import bce, combined_loss, hard_mca, pixel_accuracy, soft_mca, ssim
from .model import InpaintingUNet
from .predict import predict
from .train import EpochLog, TrainerConfig, TrainResult, load_checkpoint, train

__version__ = "0.1.0"
