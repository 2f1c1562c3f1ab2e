"""Triplet ranking hinge loss over match scores."""

from __future__ import annotations

import torch


def _relu(x):
    if torch.is_tensor(x):
        return torch.clamp(x, min=0)
    return max(0.0, x)


def hinge_loss(s_pos, s_wrong_expr, s_wrong_obj, cfg):
    """Margin loss over one triplet.

    s_pos        = S(o_i | r_i)
    s_wrong_expr = S(o_i | r_j), an expression for some other object
    s_wrong_obj  = S(o_k | r_i), some other object in the same scene

    Returns lambda1*max(0, m1 + s_wrong_expr - s_pos)
          + lambda2*max(0, m1 + s_wrong_obj - s_pos); accepts floats or
    torch tensors (differentiable in the latter case).
    """
    t1 = _relu(cfg.m1 + s_wrong_expr - s_pos)
    t2 = _relu(cfg.m1 + s_wrong_obj - s_pos)
    return cfg.lambda1 * t1 + cfg.lambda2 * t2
