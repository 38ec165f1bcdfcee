"""Plain-text multimode state specifications.

    # comment
    mode <nu> <r>          one squeezed-thermal mode per line
    gauge <4N^2 numbers>   optional symplectic conjugation, row-major,
                           may continue over following lines

The covariance is ``T (Gamma_1 + ... + Gamma_N) T^T`` with ``T`` the gauge.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .errors import SpecFormatError
from .gaussian import SqueezedThermalParams, squeezed_thermal
from .symplectic import is_symplectic


@dataclass(frozen=True)
class StateSpec:
    modes: tuple
    gauge: np.ndarray | None = None

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def covariance(self) -> np.ndarray:
        G = block_diag(*[squeezed_thermal(p) for p in self.modes])
        if self.gauge is not None:
            G = self.gauge @ G @ self.gauge.T
            G = 0.5 * (G + G.T)
        return G


def _number(tok, lineno, field):
    try:
        v = float(tok)
    except ValueError:
        raise SpecFormatError(f"{field}: expected a number, got {tok!r}", line=lineno) from None
    if not np.isfinite(v):
        raise SpecFormatError(f"{field}: non-finite value {tok!r}", line=lineno)
    return v


def parse_state_spec(text: str, tol_symp: float = 1e-9) -> StateSpec:
    modes = []
    gauge_vals = None
    gauge_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if gauge_vals is not None and toks[0] not in ("mode", "gauge"):
            gauge_vals += [_number(t, lineno, f"gauge entry {len(gauge_vals) + i + 1}")
                           for i, t in enumerate(toks)]
            continue
        if toks[0] == "mode":
            if gauge_vals is not None:
                raise SpecFormatError("mode lines must precede the gauge block", line=lineno)
            if len(toks) != 3:
                raise SpecFormatError(f"mode: expected 'mode <nu> <r>', got {len(toks) - 1} fields", line=lineno)
            nu = _number(toks[1], lineno, "mode nu")
            r = _number(toks[2], lineno, "mode r")
            if nu < 1:
                raise SpecFormatError(f"mode nu: must be >= 1, got {nu}", line=lineno)
            modes.append(SqueezedThermalParams(nu, r))
        elif toks[0] == "gauge":
            if gauge_vals is not None:
                raise SpecFormatError("duplicate gauge block", line=lineno)
            gauge_line = lineno
            gauge_vals = [_number(t, lineno, f"gauge entry {i + 1}") for i, t in enumerate(toks[1:])]
        else:
            raise SpecFormatError(f"unknown keyword {toks[0]!r}", line=lineno)
    if not modes:
        raise SpecFormatError("no mode lines", line=0)
    gauge = None
    if gauge_vals is not None:
        dim = 2 * len(modes)
        if len(gauge_vals) != dim * dim:
            raise SpecFormatError(f"gauge: expected {dim * dim} entries for {len(modes)} modes, "
                                  f"got {len(gauge_vals)}", line=gauge_line)
        gauge = np.array(gauge_vals).reshape(dim, dim)
        if not is_symplectic(gauge, tol_symp):
            raise SpecFormatError("gauge: matrix is not symplectic", line=gauge_line)
    return StateSpec(tuple(modes), gauge)


def load_state_spec(path) -> StateSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_state_spec(fh.read())


def format_state_spec(spec: StateSpec) -> str:
    lines = [f"mode {format(p.nu, '.17g')} {format(p.r, '.17g')}" for p in spec.modes]
    if spec.gauge is not None:
        lines.append("gauge")
        lines += [" ".join(format(v, ".17g") for v in row) for row in spec.gauge]
    return "\n".join(lines) + "\n"
