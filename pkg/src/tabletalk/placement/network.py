"""Encoder-decoder network producing per-relation placement score maps."""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..worldsim import N_CHANNELS, RELATIONS

INPUT_CHANNELS = N_CHANNELS + 1  # rendered scene + reference mask


def _block(cin, cout):
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, padding=1),
        nn.ReLU(inplace=True),
        nn.Conv2d(cout, cout, 3, padding=1),
        nn.ReLU(inplace=True),
    )


class PlacementNet(nn.Module):
    """Small UNet over the table grid; outputs (6, H, W) scores in [0, 1].

    The output squashing is clamp(x, 0, 1), so channels can reach exact
    zero off-relation; the per-relation placement distribution is the
    renormalized channel.
    """

    def __init__(self, base_channels: int = 12):
        super().__init__()
        c = base_channels
        self.enc1 = _block(INPUT_CHANNELS, c)
        self.enc2 = _block(c, 2 * c)
        self.enc3 = _block(2 * c, 4 * c)
        self.mid = _block(4 * c, 4 * c)
        self.dec3 = _block(8 * c, 2 * c)
        self.dec2 = _block(4 * c, c)
        self.dec1 = _block(2 * c, c)
        self.head = nn.Conv2d(c, len(RELATIONS), 1)
        # start all scores mid-range so clamp gradients are live everywhere
        nn.init.zeros_(self.head.weight)
        nn.init.constant_(self.head.bias, 0.25)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        squeeze = x.dim() == 3
        if squeeze:
            x = x.unsqueeze(0)
        e1 = self.enc1(x)
        e2 = self.enc2(F.max_pool2d(e1, 2))
        e3 = self.enc3(F.max_pool2d(e2, 2))
        m = self.mid(F.max_pool2d(e3, 2))
        d3 = self.dec3(torch.cat([F.interpolate(m, scale_factor=2, mode="nearest"), e3], dim=1))
        d2 = self.dec2(torch.cat([F.interpolate(d3, scale_factor=2, mode="nearest"), e2], dim=1))
        d1 = self.dec1(torch.cat([F.interpolate(d2, scale_factor=2, mode="nearest"), e1], dim=1))
        pre = self.head(d1)
        # straight-through clamp: values squashed hard to [0,1] so channels
        # reach exact zero, but gradients pass through the saturated region
        # (a plain clamp goes irrecoverably dead once a cell saturates)
        gamma = pre + (torch.clamp(pre, 0.0, 1.0) - pre).detach()
        return gamma[0] if squeeze else gamma


def stack_input(image, ref_mask) -> torch.Tensor:
    """Assemble the (C+1, H, W) network input from numpy arrays."""
    img = torch.as_tensor(image, dtype=torch.float32)
    mask = torch.as_tensor(ref_mask, dtype=torch.float32)
    if mask.dim() == 2:
        mask = mask.unsqueeze(0)
    if img.shape[-2:] != mask.shape[-2:]:
        raise ValueError(f"image {tuple(img.shape)} and mask {tuple(mask.shape)} disagree")
    return torch.cat([img, mask], dim=0)
