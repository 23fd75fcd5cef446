"""Exact entropy and mutual-information measures, in bits.

Every measure is evaluated from its definitional sum over the relevant
marginal table, with ``0 log 0 = 0`` applied term by term. The entropy
combination forms are used only in :func:`verify_identities` as cross-checks.

Variable groups are passed as a single name or a sequence of names; a group
stands for the composite variable formed by its members.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArgumentError
from .probability import JointDistribution

ENTROPY_FLOOR = 1e-12
MI_FLOOR = 1e-9


def _group(names) -> tuple[str, ...]:
    if isinstance(names, str):
        return (names,)
    names = tuple(names)
    if len(set(names)) != len(names):
        raise ArgumentError(f"duplicate names in group {names}")
    return names


def _disjoint(*groups):
    seen = set()
    for g in groups:
        if seen & set(g):
            raise ArgumentError(f"variable groups overlap on {sorted(seen & set(g))}")
        seen |= set(g)


def _flat(dist: JointDistribution, *groups) -> np.ndarray:
    """Marginal over the concatenated groups, one flattened axis per group."""
    names = tuple(n for g in groups for n in g)
    for n in names:
        dist.axis(n)
    arr = dist.marginal_table(names) if names else np.array(float(dist.table.sum()))
    sizes = [math.prod(dist.variable(n).size for n in g) for g in groups]
    return arr.reshape(sizes)


def _xlogx_sum(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(np.sum(p * np.log2(p)))


def entropy(dist: JointDistribution, x) -> float:
    """H(X) = -sum p(x) log2 p(x)."""
    x = _group(x)
    return 0.0 - _xlogx_sum(_flat(dist, x).ravel())


def joint_entropy(dist: JointDistribution, x, y) -> float:
    """H(X,Y) over the marginal on the union of both groups."""
    x, y = _group(x), _group(y)
    _disjoint(x, y)
    return 0.0 - _xlogx_sum(_flat(dist, x, y).ravel())


def conditional_entropy(dist: JointDistribution, y, given_x) -> float:
    """H(Y|X) = -sum p(x,y) log2 p(y|x)."""
    y, x = _group(y), _group(given_x)
    _disjoint(x, y)
    pxy = _flat(dist, x, y)
    px = np.broadcast_to(pxy.sum(axis=1, keepdims=True), pxy.shape)
    nz = pxy > 0
    return -float(np.sum(pxy[nz] * np.log2(pxy[nz] / px[nz])))


def mutual_information(dist: JointDistribution, x, y) -> float:
    """I(X;Y) = sum p(x,y) log2 [p(x,y) / (p(x) p(y))]. Raw value, not clamped."""
    x, y = _group(x), _group(y)
    _disjoint(x, y)
    pxy = _flat(dist, x, y)
    denom = pxy.sum(axis=1, keepdims=True) * pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    return float(np.sum(pxy[nz] * np.log2(pxy[nz] / denom[nz])))


def conditional_mutual_information(dist: JointDistribution, x, y, z) -> float:
    """I(X;Y|Z) = sum p(x,y,z) log2 [p(x,y|z) / (p(x|z) p(y|z))]. Raw value."""
    x, y, z = _group(x), _group(y), _group(z)
    _disjoint(x, y, z)
    pxyz = _flat(dist, x, y, z)
    pz = pxyz.sum(axis=(0, 1), keepdims=True)
    pxz = pxyz.sum(axis=1, keepdims=True)
    pyz = pxyz.sum(axis=0, keepdims=True)
    num = pxyz * pz
    den = pxz * pyz
    nz = pxyz > 0
    return float(np.sum(pxyz[nz] * np.log2(num[nz] / den[nz])))


def clamp(value: float, floor: float = MI_FLOOR) -> float:
    """Reporting-layer clamp: values in [-floor, 0) are shown as 0."""
    if -floor <= value < 0.0:
        return 0.0
    return value + 0.0  # folds -0.0


@dataclass(frozen=True)
class Residual:
    name: str
    value: float
    tolerance: float
    inequality: bool = False
    applicable: bool = True

    @property
    def passed(self) -> bool:
        """False only for an applicable check that is violated."""
        if not self.applicable:
            return True
        # inequalities carry their slack, which must not go below -tolerance
        if self.inequality:
            return self.value >= -self.tolerance
        return abs(self.value) < self.tolerance

    @property
    def status(self) -> str:
        if not self.applicable:
            return "n/a"
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "kind": "inequality" if self.inequality else "equality",
                "status": self.status}


@dataclass(frozen=True)
class IdentityReport:
    residuals: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.residuals)

    @property
    def failures(self) -> list:
        return [r for r in self.residuals if not r.passed]

    def worst(self) -> float:
        return max((abs(r.value) for r in self.residuals if not r.inequality), default=0.0)

    def __getitem__(self, name) -> Residual:
        for r in self.residuals:
            if r.name == name:
                return r
        raise KeyError(name)


def verify_identities(dist: JointDistribution, x, y, z=(), tolerance: float = 1e-9) -> IdentityReport:
    """Residuals of the standard entropy relations on the given groups.

    Always checks the joint/conditional decompositions, the swap relation
    H(Y|X) = H(X|Y) + H(Y) - H(X), and H(X,Y) = H(Y,X). The entropy forms of
    I(X;Y) and, when ``z`` is non-empty, of I(X;Y|Z) and the chain rule
    I(X; Y,Z) = I(X;Z) + I(X;Y|Z) are added.
    """
    x, y, z = _group(x), _group(y), _group(z)
    _disjoint(x, y, z)
    hx, hy = entropy(dist, x), entropy(dist, y)
    hxy, hyx = joint_entropy(dist, x, y), joint_entropy(dist, y, x)
    hy_x = conditional_entropy(dist, y, x)
    hx_y = conditional_entropy(dist, x, y)
    res = [
        Residual("cond_entropy_y_given_x", hy_x - (hyx - hx), tolerance),
        Residual("cond_entropy_x_given_y", hx_y - (hyx - hy), tolerance),
        Residual("cond_entropy_swap", hy_x - (hx_y + hy - hx), tolerance),
        Residual("joint_entropy_symmetry", hxy - hyx, tolerance),
        Residual("mi_entropy_form", mutual_information(dist, x, y) - (hx + hy - hxy), tolerance),
    ]
    if z:
        hz = entropy(dist, z)
        hxz, hyz = joint_entropy(dist, x, z), joint_entropy(dist, y, z)
        hxyz = entropy(dist, x + y + z)
        cmi = conditional_mutual_information(dist, x, y, z)
        res.append(Residual("cmi_entropy_form", cmi - (hxz + hyz - hxyz - hz), tolerance))
        chain = mutual_information(dist, x, y + z) - (mutual_information(dist, x, z) + cmi)
        res.append(Residual("mi_chain_rule", chain, tolerance))
    return IdentityReport(res)
