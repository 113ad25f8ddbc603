"""Per-tick haptic pipeline: proxy collision, spring force, voxel-luminosity modulation, smoothing.

The tick order is fixed: proxy update -> raw penalty force -> luminosity
sampling at the contact point -> modulation -> temporal smoothing -> magnitude
clamp. Everything is a pure function of its inputs except the proxy state,
which the caller threads from tick to tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .volume import Volume, ball_window, sample_alpha

# Rec. 709 luma coefficients; sum to exactly 1.0 in float64.
LUMA_WEIGHTS = (0.2126, 0.7152, 0.0722)

# Tangential relaxation passes per proxy update.
_RELAX_STEPS = 3


@dataclass(frozen=True)
class HapticConfig:
    """Tunable parameters of the force pipeline.

    ``sample_radius`` is the radius (mm) of the luminosity sampling sphere;
    None couples it to the probe radius. ``iso`` is the solidity threshold on
    normalized alpha: material at or above it blocks the proxy.
    """

    stiffness_k: float = 0.5  # N/mm
    iso: float = 0.5
    sample_radius: float | None = None
    w_r: float = LUMA_WEIGHTS[0]
    w_g: float = LUMA_WEIGHTS[1]
    w_b: float = LUMA_WEIGHTS[2]
    haptics_enabled: bool = True
    smoothing_enabled: bool = True
    f_max: float = 7.0  # N
    tick_rate: int = 1000  # Hz

    def __post_init__(self) -> None:
        if self.stiffness_k <= 0:
            raise ValueError(f"stiffness_k must be > 0, got {self.stiffness_k}")
        if not 0.0 < self.iso < 1.0:
            raise ValueError(f"iso must be in (0, 1), got {self.iso}")
        if self.sample_radius is not None and self.sample_radius <= 0:
            raise ValueError(f"sample_radius must be > 0, got {self.sample_radius}")
        if abs(self.w_r + self.w_g + self.w_b - 1.0) > 1e-9:
            raise ValueError(
                f"channel weights must sum to 1, got {self.w_r + self.w_g + self.w_b}"
            )
        if self.f_max <= 0:
            raise ValueError(f"f_max must be > 0, got {self.f_max}")
        if self.tick_rate < 1:
            raise ValueError(f"tick_rate must be >= 1, got {self.tick_rate}")


@dataclass(frozen=True, eq=False)
class ProbeState:
    """Device-side input for one tick: position, tool-tip radius, button state."""

    device_pos: np.ndarray  # world mm
    radius: float  # mm
    sculpt_pressed: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "device_pos", np.asarray(self.device_pos, dtype=np.float64))
        if self.radius <= 0:
            raise ValueError(f"probe radius must be > 0, got {self.radius}")


@dataclass(frozen=True, eq=False)
class ProxyState:
    """Surface-constrained contact point; never inside solid material while in contact."""

    proxy_pos: np.ndarray  # world mm
    in_contact: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "proxy_pos", np.asarray(self.proxy_pos, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class ForceSample:
    """Auditable per-tick haptic record."""

    tick: int
    raw_f: np.ndarray  # N, spring force before modulation
    l_avg: float  # average luminosity in [0, 1]
    modulated_f: np.ndarray  # N, after luminosity scaling
    output_f: np.ndarray  # N, after smoothing and clamp
    n_sampled: int  # voxels inside the sampling sphere


def _alpha_gradient(volume: Volume, p: np.ndarray) -> np.ndarray:
    """Central-difference gradient of the alpha field; points toward solid."""
    h = 0.5 * min(volume.spacing)
    g = np.empty(3)
    for axis in range(3):
        q = p.copy()
        q[axis] = p[axis] + h
        hi = sample_alpha(volume, q)
        q[axis] = p[axis] - h
        lo = sample_alpha(volume, q)
        g[axis] = (hi - lo) / (2.0 * h)
    return g


def _bisect_to_surface(
    volume: Volume, free_pt: np.ndarray, solid_pt: np.ndarray, iso: float, tol: float
) -> np.ndarray:
    """Bisect the segment free->solid down to ``tol``; returns the free-side end."""
    lo = np.asarray(free_pt, dtype=np.float64)
    hi = np.asarray(solid_pt, dtype=np.float64)
    while float(np.linalg.norm(hi - lo)) > tol:
        mid = 0.5 * (lo + hi)
        if sample_alpha(volume, mid) < iso:
            lo = mid
        else:
            hi = mid
    return lo


def _toward_nearest_exit(volume: Volume, p: np.ndarray) -> np.ndarray:
    """Unit direction from p to the closest face of the voxel-center bounding box."""
    best_axis, best_sign, best_dist = 0, 1.0, math.inf
    for axis in range(3):
        n = volume.dims[axis]
        lo_w = volume.origin[axis]
        hi_w = volume.origin[axis] + (n - 1) * volume.spacing[axis]
        if p[axis] - lo_w < best_dist:
            best_axis, best_sign, best_dist = axis, -1.0, p[axis] - lo_w
        if hi_w - p[axis] < best_dist:
            best_axis, best_sign, best_dist = axis, 1.0, hi_w - p[axis]
    d = np.zeros(3)
    d[best_axis] = best_sign
    return d


def _escape_solid(volume: Volume, p: np.ndarray, iso: float, tol: float) -> np.ndarray:
    """Re-project a buried point to a nearby non-solid point along the alpha gradient.

    Walks downhill in alpha (falling back to the nearest bounding-box exit on
    flat plateaus), then bisects back toward the last buried point. Always
    terminates: outside the grid alpha reads 0 < iso.
    """
    step = 0.5 * min(volume.spacing)
    max_extent = max(
        (n - 1) * s for n, s in zip(volume.dims, volume.spacing)
    )
    max_steps = int(4 * (max_extent / step + 2))
    q = p.astype(np.float64).copy()
    last_solid = q.copy()
    for _ in range(max_steps):
        g = _alpha_gradient(volume, q)
        norm = float(np.linalg.norm(g))
        direction = -g / norm if norm > 1e-12 else _toward_nearest_exit(volume, q)
        q = q + direction * step
        if sample_alpha(volume, q) < iso:
            return _bisect_to_surface(volume, q, last_solid, iso, tol)
    # Pathological field: jump straight out of the support and tighten back.
    out = q.copy()
    axis = int(np.argmax(volume.dims))
    out[axis] = volume.origin[axis] + volume.dims[axis] * volume.spacing[axis] + 1.0
    return _bisect_to_surface(volume, out, last_solid, iso, tol)


def update_proxy(
    prev: ProxyState, probe: ProbeState, volume: Volume, cfg: HapticConfig
) -> ProxyState:
    """Advance the surface proxy for the probe's current device position.

    Free-space motion snaps the proxy to the device. On contact, the surface
    crossing on the previous-proxy -> device segment is found by bisection to
    min(spacing)/100, then up to three tangential relaxation steps slide the
    proxy along the surface toward the device. The returned proxy is never
    inside solid material.
    """
    device = np.asarray(probe.device_pos, dtype=np.float64)
    if sample_alpha(volume, device) < cfg.iso:
        return ProxyState(device.copy(), in_contact=False)
    tol = min(volume.spacing) / 100.0
    start = np.asarray(prev.proxy_pos, dtype=np.float64)
    if sample_alpha(volume, start) >= cfg.iso:
        # Stale proxy (e.g. buried initial state); re-validate before bisecting.
        start = _escape_solid(volume, start, cfg.iso, tol)
    proxy = _bisect_to_surface(volume, start, device, cfg.iso, tol)
    for _ in range(_RELAX_STEPS):
        offset = device - proxy
        g = _alpha_gradient(volume, proxy)
        g_norm = float(np.linalg.norm(g))
        if g_norm < 1e-12:
            break
        g_hat = g / g_norm
        tangential = offset - float(np.dot(offset, g_hat)) * g_hat
        if float(np.linalg.norm(tangential)) <= tol:
            break
        candidate = proxy + tangential
        if sample_alpha(volume, candidate) < cfg.iso:
            proxy = candidate
        else:
            proxy = _bisect_to_surface(volume, proxy, candidate, cfg.iso, tol)
    return ProxyState(proxy, in_contact=True)


def compute_raw_force(proxy: ProxyState, probe: ProbeState, cfg: HapticConfig) -> np.ndarray:
    """Penalty spring from device to proxy: F = k * (proxy - device); zero when free."""
    if not proxy.in_contact:
        return np.zeros(3)
    return cfg.stiffness_k * (proxy.proxy_pos - probe.device_pos)


def sample_luminosity(
    volume: Volume, center: Sequence[float], radius: float, cfg: HapticConfig
) -> tuple[float, int]:
    """Average weighted luminosity over voxels within ``radius`` mm of ``center``.

    Each of the N in-sphere voxels contributes
    (w_r*R + w_g*G + w_b*B)/255 * A/255; the result is the plain average, or
    (0, 0) when the sphere contains no voxel centers.
    """
    window = ball_window(volume, center, radius)
    if window is None:
        return 0.0, 0
    lo, mask = window
    n = int(mask.sum())
    block = volume.data[
        lo.k : lo.k + mask.shape[0],
        lo.j : lo.j + mask.shape[1],
        lo.i : lo.i + mask.shape[2],
    ].astype(np.float64)
    block /= 255.0
    lum = (cfg.w_r * block[..., 0] + cfg.w_g * block[..., 1] + cfg.w_b * block[..., 2]) * block[..., 3]
    return float(lum[mask].mean()), n


def modulate_force(raw_f: np.ndarray, l_avg: float, cfg: HapticConfig) -> np.ndarray:
    """Scale the raw force by average luminosity; identity when the toggle is off."""
    raw_f = np.asarray(raw_f, dtype=np.float64)
    if not cfg.haptics_enabled:
        return raw_f.copy()
    return l_avg * raw_f


def smooth_force(
    current: np.ndarray, prev_output: np.ndarray, cfg: HapticConfig
) -> np.ndarray:
    """Average the current force with the previously emitted output; off -> passthrough."""
    current = np.asarray(current, dtype=np.float64)
    if not cfg.smoothing_enabled:
        return current.copy()
    return 0.5 * (current + np.asarray(prev_output, dtype=np.float64))


def clamp_force(f: np.ndarray, f_max: float) -> np.ndarray:
    """Clamp magnitude to f_max, preserving direction."""
    f = np.asarray(f, dtype=np.float64)
    mag = float(np.linalg.norm(f))
    if mag <= f_max or mag == 0.0:
        return f.copy()
    return f * (f_max / mag)


def haptic_tick(
    probe: ProbeState,
    proxy: ProxyState,
    volume: Volume,
    prev: ForceSample | None,
    cfg: HapticConfig,
    tick: int,
) -> tuple[ForceSample, ProxyState]:
    """Run one tick of the fixed pipeline and return the force record and new proxy."""
    new_proxy = update_proxy(proxy, probe, volume, cfg)
    raw = compute_raw_force(new_proxy, probe, cfg)
    if new_proxy.in_contact:
        radius = cfg.sample_radius if cfg.sample_radius is not None else probe.radius
        l_avg, n = sample_luminosity(volume, new_proxy.proxy_pos, radius, cfg)
    else:
        l_avg, n = 0.0, 0
    modulated = modulate_force(raw, l_avg, cfg)
    prev_output = prev.output_f if prev is not None else np.zeros(3)
    smoothed = smooth_force(modulated, prev_output, cfg)
    output = clamp_force(smoothed, cfg.f_max)
    sample = ForceSample(
        tick=tick,
        raw_f=raw,
        l_avg=l_avg,
        modulated_f=modulated,
        output_f=output,
        n_sampled=n,
    )
    return sample, new_proxy


def resolve_sample_radius(cfg: HapticConfig, probe_radius: float) -> HapticConfig:
    """Pin an unset sampling radius to the probe radius."""
    if cfg.sample_radius is not None:
        return cfg
    return replace(cfg, sample_radius=float(probe_radius))
