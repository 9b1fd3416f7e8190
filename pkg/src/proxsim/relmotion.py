"""Target-centred RTN (LVLH) frame and per-timestep relative-motion features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .orbital import R_EARTH, StateVector

SPEED_OF_LIGHT = 299_792_458.0  # m/s
CURVATURE_EPS = 1e-12


class FrameError(ValueError):
    """Degenerate geometry: undefined frame, coincident bodies, short series."""


@dataclass(frozen=True)
class RtnBasis:
    r_hat: np.ndarray
    t_hat: np.ndarray
    n_hat: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """Rows are R, T, N: ``matrix @ v_eci`` gives RTN components."""
        return np.vstack((self.r_hat, self.t_hat, self.n_hat))


@dataclass(frozen=True)
class RelativeState:
    t: float
    rel_pos_rtn: np.ndarray
    rel_vel_rtn: np.ndarray
    range: float
    range_rate: float


@dataclass(frozen=True)
class TcaResult:
    i_star: int
    t_tca_frac: float
    t_to_tca: np.ndarray


def rtn_basis(target: StateVector) -> RtnBasis:
    r_hat, t_hat, n_hat = rtn_axes(target.position, target.velocity)
    return RtnBasis(r_hat, t_hat, n_hat)


def rtn_axes(position, velocity):
    """Gram-Schmidt RTN axes; broadcasts over leading dimensions.

    R is along the position, T is the velocity with its radial part removed,
    N = R x T.
    """
    position = np.asarray(position, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    rn = np.linalg.norm(position, axis=-1, keepdims=True)
    if np.any(rn == 0):
        raise FrameError("target position is zero")
    r_hat = position / rn
    t_prime = velocity - np.sum(velocity * r_hat, axis=-1, keepdims=True) * r_hat
    tn = np.linalg.norm(t_prime, axis=-1, keepdims=True)
    if np.any(tn <= 1e-9):
        raise FrameError("velocity is parallel to position; along-track axis undefined")
    t_hat = t_prime / tn
    # second pass removes the radial residue left when v is nearly parallel to r
    t_hat = t_hat - np.sum(t_hat * r_hat, axis=-1, keepdims=True) * r_hat
    t_hat = t_hat / np.linalg.norm(t_hat, axis=-1, keepdims=True)
    n_hat = np.cross(r_hat, t_hat)
    return r_hat, t_hat, n_hat


def relative_state(attacker: StateVector, target: StateVector, basis: RtnBasis | None = None) -> RelativeState:
    if attacker.t != target.t:
        raise FrameError("attacker and target states are at different epochs")
    basis = basis or rtn_basis(target)
    r_rel = attacker.position - target.position
    v_rel = attacker.velocity - target.velocity
    rng_ = float(np.linalg.norm(r_rel))
    if rng_ == 0.0:
        raise FrameError("attacker and target positions coincide")
    m = basis.matrix
    return RelativeState(attacker.t, m @ r_rel, m @ v_rel, rng_, float(np.dot(v_rel, r_rel)) / rng_)


def central_diff(series, dt: float) -> np.ndarray:
    """Central differences inside, one-sided two-point differences at both ends."""
    x = np.asarray(series, dtype=float)
    if x.shape[0] < 3:
        raise FrameError("central differences need at least 3 samples")
    if dt <= 0:
        raise ValueError("dt must be positive")
    out = np.empty_like(x)
    out[1:-1] = (x[2:] - x[:-2]) / (2.0 * dt)
    out[0] = (x[1] - x[0]) / dt
    out[-1] = (x[-1] - x[-2]) / dt
    return out


def curvature(v, a) -> np.ndarray | float:
    """Frenet-Serret curvature |v x a| / (|v|^3 + eps); broadcasts over rows."""
    v = np.asarray(v, dtype=float)
    a = np.asarray(a, dtype=float)
    num = np.linalg.norm(np.cross(v, a), axis=-1)
    speed = np.linalg.norm(v, axis=-1)
    return num / (speed**3 + CURVATURE_EPS)


def doppler_shift(range_rate, f_c: float):
    if f_c <= 0:
        raise ValueError("carrier frequency must be positive")
    wavelength = SPEED_OF_LIGHT / f_c
    return -np.asarray(range_rate, dtype=float) / wavelength


def tca_features(range_series) -> TcaResult:
    r = np.asarray(range_series, dtype=float)
    n = r.shape[0]
    if n < 2:
        raise FrameError("TCA needs at least 2 samples")
    i_star = int(np.argmin(r))  # first occurrence on ties
    idx = np.arange(n)
    return TcaResult(i_star, i_star / (n - 1), (idx - i_star) / (n - 1))


def boresight_angle(attacker_pos, receiver_pos, boresight_dir):
    """Angle (rad) between the receiver boresight and the line of sight to the attacker."""
    los = np.asarray(attacker_pos, dtype=float) - np.asarray(receiver_pos, dtype=float)
    dist = np.linalg.norm(los, axis=-1)
    if np.any(dist == 0):
        raise FrameError("attacker coincides with the receiver")
    cos_t = np.sum(los * np.asarray(boresight_dir, dtype=float), axis=-1) / dist
    return np.arccos(np.clip(cos_t, -1.0, 1.0))


def earth_visible(p1, p2, radius: float = R_EARTH):
    """True where the segment p1-p2 clears the Earth sphere."""
    p1 = np.asarray(p1, dtype=float)
    d = np.asarray(p2, dtype=float) - p1
    dd = np.sum(d * d, axis=-1)
    s = np.clip(-np.sum(p1 * d, axis=-1) / dd, 0.0, 1.0)
    closest = p1 + s[..., None] * d
    return np.linalg.norm(closest, axis=-1) > radius


@dataclass(frozen=True)
class KinematicSeries:
    """Columnar per-timestep relative-motion features for one scenario."""

    t: np.ndarray
    range: np.ndarray
    range_rate: np.ndarray
    v_rtn: np.ndarray  # (N, 3)
    a_rtn: np.ndarray  # (N, 3)
    jerk: np.ndarray
    curvature: np.ndarray
    doppler_hz: np.ndarray
    doppler_rate_hzs: np.ndarray
    boresight_rad: np.ndarray
    tca: TcaResult
    visibility: np.ndarray


def kinematic_series(t, att_pos, att_vel, tgt_pos, tgt_vel, f_c: float, boresight_dir) -> KinematicSeries:
    """All relative-motion features on a uniform time grid.

    Accelerations difference the RTN velocity components, jerk differences
    the acceleration norm, and the Doppler rate differences the Doppler
    shift, all with ``central_diff``.
    """
    t = np.asarray(t, dtype=float)
    dt = float(t[1] - t[0])
    r_hat, t_hat, n_hat = rtn_axes(tgt_pos, tgt_vel)
    r_rel = att_pos - tgt_pos
    v_rel = att_vel - tgt_vel
    rng_ = np.linalg.norm(r_rel, axis=1)
    if np.any(rng_ == 0):
        raise FrameError("attacker and target positions coincide")
    rdot = np.sum(r_rel * v_rel, axis=1) / rng_
    v_rtn = np.column_stack([np.sum(v_rel * ax, axis=1) for ax in (r_hat, t_hat, n_hat)])
    a_rtn = np.column_stack([central_diff(v_rtn[:, k], dt) for k in range(3)])
    jerk = central_diff(np.linalg.norm(a_rtn, axis=1), dt)
    kappa = curvature(v_rtn, a_rtn)
    f_d = doppler_shift(rdot, f_c)
    return KinematicSeries(
        t=t,
        range=rng_,
        range_rate=rdot,
        v_rtn=v_rtn,
        a_rtn=a_rtn,
        jerk=jerk,
        curvature=kappa,
        doppler_hz=f_d,
        doppler_rate_hzs=central_diff(f_d, dt),
        boresight_rad=boresight_angle(att_pos, tgt_pos, boresight_dir),
        tca=tca_features(rng_),
        visibility=earth_visible(att_pos, tgt_pos),
    )
