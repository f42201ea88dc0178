"""Reconstruction rules ``x_hat = g(b, mask)``.

Two decoders are provided: zero-filling (the adjoint) and iterative
soft-thresholding (IST) with an l1 penalty in the x-f domain::

    F(x) = 0.5 * ||P F x - b||^2 + lam * ||Phi x||_1

where ``Phi`` is the unitary temporal DFT. Every decoder is a pure function of
its inputs. The greedy loop uses the dense entry point `Decoder.reconstruct`,
which takes the full ground-truth spectrum and a ``(T, N)`` row mask, to avoid
gathering and scattering on every call.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .transform import Measurements, inverse_fft, forward_fft


class NoMeasurementsError(ValueError):
    pass


DEFAULT_IST = {"lambda": 1e-3, "iters": 200, "step": 1.0, "tol": 1e-6}
KINDS = ("zf", "ist")


@dataclass(frozen=True)
class DecoderSpec:
    id: str
    kind: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = self.kind or self.id
        if kind not in KINDS:
            raise ValueError(f"unknown decoder kind {kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        params = dict(self.params)
        if kind == "ist":
            for key, val in DEFAULT_IST.items():
                params.setdefault(key, val)
            params["iters"] = int(params["iters"])
            for key in ("lambda", "step", "tol"):
                params[key] = float(params[key])
            if params["lambda"] < 0:
                raise ValueError("lambda must be >= 0")
            if params["iters"] < 1:
                raise ValueError("iters must be >= 1")
            if not 0 < params["step"] <= 1:
                raise ValueError("step must lie in (0, 1]")
            if params["tol"] < 0:
                raise ValueError("tol must be >= 0")
        object.__setattr__(self, "params", params)

    def to_config(self, parser: configparser.ConfigParser, section: str = "decoder"):
        parser[section] = {"id": self.id, "kind": self.kind}
        for key in sorted(self.params):
            parser[section][key] = repr(self.params[key])

    @classmethod
    def from_config(cls, section) -> DecoderSpec:
        items = dict(section)
        ident = items.pop("id")
        kind = items.pop("kind", "")
        params = {}
        for key, raw in items.items():
            params[key] = float(raw) if key != "iters" else int(float(raw))
        return cls(ident, kind, params)


@dataclass
class ISTResult:
    image: np.ndarray
    objective: list
    iterations: int


def ist_dense(kspace_meas, rowmask, lam=1e-3, iters=200, step=1.0, tol=1e-6):
    """Proximal-gradient minimization of the x-f l1 objective.

    Iterates on ``u = Phi^* x`` rather than ``Phi x``: the two differ by a
    reversal of the temporal-frequency axis, so their l1 norms agree, and in
    terms of `u` the forward model collapses to a masked
    unitary 3-D DFT. Each step then costs one forward and one inverse FFT.

    Parameters
    ----------
    kspace_meas : ndarray, (T, N, N)
        Measured k-space, zero on unacquired rows.
    rowmask : ndarray, (T, N) uint8
        Acquired-row indicator.

    Returns
    -------
    ISTResult
        Final estimate and the objective at x_0 = 0 and after every step.
    """
    y = np.ascontiguousarray(kspace_meas, dtype=np.complex128)
    rowmask = np.ascontiguousarray(rowmask, dtype=np.uint8)
    u = np.zeros_like(y)
    resid = np.empty_like(y)
    objective = [kernels.masked_residual(u, rowmask, y, resid)]
    thresh = lam * step
    done = 0
    for _ in range(iters):
        grad = np.fft.ifftn(resid, norm="ortho")
        l1 = kernels.prox_step_(u, grad, step, thresh)
        data = kernels.masked_residual(np.fft.fftn(u, norm="ortho"), rowmask, y, resid)
        objective.append(data + lam * l1)
        done += 1
        prev, cur = objective[-2], objective[-1]
        if cur == 0.0:
            break
        if tol > 0 and prev - cur <= tol * abs(prev):
            break
    x = np.fft.fft(u, axis=0, norm="ortho")
    return ISTResult(x, objective, done)


@dataclass(frozen=True)
class Decoder:
    spec: DecoderSpec

    @property
    def id(self) -> str:
        return self.spec.id

    def reconstruct(self, kspace_meas: np.ndarray, rowmask: np.ndarray) -> np.ndarray:
        if self.spec.kind == "zf":
            return inverse_fft(kspace_meas)
        if not rowmask.any():
            raise NoMeasurementsError("no measurements")
        p = self.spec.params
        return ist_dense(kspace_meas, rowmask, p["lambda"], p["iters"], p["step"], p["tol"]).image

    def reconstruct_truth(self, truth_kspace: np.ndarray, rowmask: np.ndarray) -> np.ndarray:
        """Reconstruct from the rows of a full spectrum selected by `rowmask`."""
        return self.reconstruct(truth_kspace * rowmask[:, :, None], rowmask)

    def __call__(self, meas: Measurements) -> np.ndarray:
        return self.reconstruct(meas.dense(), meas.mask.row_mask())


def decode_zero_fill(meas: Measurements) -> np.ndarray:
    return inverse_fft(meas.dense())


def decode_ist(meas: Measurements, spec: DecoderSpec | None = None) -> np.ndarray:
    spec = spec or DecoderSpec("ist")
    if not len(meas.mask):
        raise NoMeasurementsError("no measurements")
    p = spec.params
    return ist_dense(meas.dense(), meas.mask.row_mask(), p["lambda"], p["iters"], p["step"], p["tol"]).image


def ist_objective(x, meas: Measurements, lam: float) -> float:
    """Direct evaluation of the IST objective (for cross-checks)."""
    dense = forward_fft(x) * meas.mask.row_mask()[:, :, None]
    r = dense - meas.dense()
    coef = np.fft.fft(np.asarray(x), axis=0, norm="ortho")
    return 0.5 * float(np.vdot(r, r).real) + lam * float(np.abs(coef).sum())


class DecoderRegistry:
    def __init__(self):
        self._decoders: dict[str, Decoder] = {}

    def register(self, spec: DecoderSpec) -> Decoder:
        if spec.id in self._decoders:
            raise KeyError(f"decoder {spec.id!r} already registered")
        dec = Decoder(spec)
        self._decoders[spec.id] = dec
        return dec

    def get(self, ident: str) -> Decoder:
        try:
            return self._decoders[ident]
        except KeyError:
            raise KeyError(f"unknown decoder {ident!r}") from None

    def __contains__(self, ident):
        return ident in self._decoders

    def ids(self):
        return sorted(self._decoders)


default_registry = DecoderRegistry()
default_registry.register(DecoderSpec("zf"))
default_registry.register(DecoderSpec("ist"))


def register_decoder(spec: DecoderSpec, registry: DecoderRegistry | None = None) -> Decoder:
    return (registry or default_registry).register(spec)


def get_decoder(ident: str, registry: DecoderRegistry | None = None) -> Decoder:
    return (registry or default_registry).get(ident)

