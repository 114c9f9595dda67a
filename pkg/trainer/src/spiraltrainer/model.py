"""U-Net with a ResNet-34 encoder and a sigmoid single-channel head."""

from __future__ import annotations

import warnings

import torch
import torch.nn as nn
from torchvision.models import resnet34


def _conv_block(in_ch: int, out_ch: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, 3, padding=1, bias=False),
        nn.BatchNorm2d(out_ch),
        nn.ReLU(inplace=True),
        nn.Conv2d(out_ch, out_ch, 3, padding=1, bias=False),
        nn.BatchNorm2d(out_ch),
        nn.ReLU(inplace=True),
    )


class DecoderStage(nn.Module):
    def __init__(self, in_ch: int, skip_ch: int, out_ch: int):
        super().__init__()
        self.up = nn.Upsample(scale_factor=2, mode="nearest")
        self.block = _conv_block(in_ch + skip_ch, out_ch)

    def forward(self, x, skip=None):
        x = self.up(x)
        if skip is not None:
            x = torch.cat([x, skip], dim=1)
        return self.block(x)


class InpaintingUNet(nn.Module):
    """Grayscale in, per-pixel probability out.

    Encoder taps the standard ResNet-34 stages (64/64/128/256/512 at
    strides 2..32); the decoder upsamples with skip connections back to
    full resolution.  Input sides must be divisible by 32.
    """

    def __init__(self, pretrained: bool = False):
        super().__init__()
        encoder = self._make_encoder(pretrained)
        self.conv1, self.bn1, self.relu = encoder.conv1, encoder.bn1, encoder.relu
        self.maxpool = encoder.maxpool
        self.layer1, self.layer2 = encoder.layer1, encoder.layer2
        self.layer3, self.layer4 = encoder.layer3, encoder.layer4

        self.decode4 = DecoderStage(512, 256, 256)
        self.decode3 = DecoderStage(256, 128, 128)
        self.decode2 = DecoderStage(128, 64, 64)
        self.decode1 = DecoderStage(64, 64, 32)
        self.decode0 = DecoderStage(32, 0, 16)
        self.head = nn.Conv2d(16, 1, 1)

    @staticmethod
    def _make_encoder(pretrained: bool):
        if pretrained:
            try:
                encoder = resnet34(weights="IMAGENET1K_V1")
                # adapt the RGB stem to 1 channel, keeping activation scale
                w = encoder.conv1.weight.data.sum(dim=1, keepdim=True)
                encoder.conv1 = nn.Conv2d(1, 64, 7, stride=2, padding=3, bias=False)
                encoder.conv1.weight.data = w
                return encoder
            except Exception as exc:  # no network: fall back to random init
                warnings.warn(f"pretrained weights unavailable ({exc}); using random init")
        encoder = resnet34(weights=None)
        encoder.conv1 = nn.Conv2d(1, 64, 7, stride=2, padding=3, bias=False)
        return encoder

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        s0 = self.relu(self.bn1(self.conv1(x)))  # 1/2, 64
        s1 = self.layer1(self.maxpool(s0))       # 1/4, 64
        s2 = self.layer2(s1)                     # 1/8, 128
        s3 = self.layer3(s2)                     # 1/16, 256
        s4 = self.layer4(s3)                     # 1/32, 512
        d = self.decode4(s4, s3)
        d = self.decode3(d, s2)
        d = self.decode2(d, s1)
        d = self.decode1(d, s0)
        d = self.decode0(d)
        return torch.sigmoid(self.head(d))
