"""Training objective and monitoring metrics, matching the scorer's
definitions bit-for-bit at float64 precision."""

from __future__ import annotations

import torch
import torch.nn.functional as F

BCE_EPS = 1e-7


def soft_mca(pred: torch.Tensor, truth: torch.Tensor) -> torch.Tensor:
    """Mean of per-class soft accuracies over the classes present."""
    white = truth > 0.5
    parts = []
    if white.any():
        parts.append(pred[white].mean())
    if (~white).any():
        parts.append((1.0 - pred[~white]).mean())
    return torch.stack(parts).mean()


def bce(pred: torch.Tensor, truth: torch.Tensor) -> torch.Tensor:
    p = pred.clamp(BCE_EPS, 1.0 - BCE_EPS)
    return F.binary_cross_entropy(p, truth)


def combined_loss(
    pred: torch.Tensor, truth: torch.Tensor, alpha: float = 1.0, beta: float = 0.5
) -> torch.Tensor:
    """alpha * (1 - soft_mca) + beta * bce."""
    return alpha * (1.0 - soft_mca(pred, truth)) + beta * bce(pred, truth)


def hard_mca(pred: torch.Tensor, truth: torch.Tensor, threshold: float = 0.5) -> torch.Tensor:
    return soft_mca((pred >= threshold).to(pred.dtype), truth)


def pixel_accuracy(pred: torch.Tensor, truth: torch.Tensor, threshold: float = 0.5) -> torch.Tensor:
    return ((pred >= threshold).to(pred.dtype) == truth).to(pred.dtype).mean()


def _gaussian_window(size: int, sigma: float, device, dtype) -> torch.Tensor:
    coords = torch.arange(size, device=device, dtype=dtype) - (size - 1) / 2.0
    g = torch.exp(-(coords**2) / (2.0 * sigma**2))
    g = g / g.sum()
    return (g[:, None] * g[None, :])[None, None]


def ssim(pred: torch.Tensor, truth: torch.Tensor, window: int = 11, sigma: float = 1.5) -> torch.Tensor:
    """Mean structural similarity, Gaussian window, dynamic range 1."""
    c1, c2 = 0.01**2, 0.03**2
    w = _gaussian_window(window, sigma, pred.device, pred.dtype)
    pad = window // 2
    mu_p = F.conv2d(pred, w, padding=pad)
    mu_t = F.conv2d(truth, w, padding=pad)
    var_p = F.conv2d(pred * pred, w, padding=pad) - mu_p**2
    var_t = F.conv2d(truth * truth, w, padding=pad) - mu_t**2
    cov = F.conv2d(pred * truth, w, padding=pad) - mu_p * mu_t
    num = (2 * mu_p * mu_t + c1) * (2 * cov + c2)
    den = (mu_p**2 + mu_t**2 + c1) * (var_p + var_t + c2)
    return (num / den).mean()
