"""Two-body orbit sampling, propagation and impulsive maneuvers.

All states are Earth-centered inertial (ECI), SI units. Propagation is
Keplerian: the eccentric-anomaly form of the f and g functions, which has
no singularity for circular or equatorial orbits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

MU_EARTH = 3.986004418e14  # m^3/s^2
R_EARTH = 6.378137e6  # m, equatorial
OMEGA_EARTH = 7.2921159e-5  # rad/s
A_GEO = 42_164_169.0  # m

KEPLER_TOL = 1e-12  # rad
_TWO_PI = 2.0 * math.pi


class ConfigurationError(ValueError):
    """Invalid regime band, prior or scenario configuration."""


class OrbitDomainError(ValueError):
    """Orbit outside the supported (bound, non-impacting) domain."""


class BehaviorClass(enum.Enum):
    BENIGN = "benign"
    COVERT = "covert"
    THREATENING = "threatening"

    @property
    def index(self) -> int:
        return _CLASS_ORDER.index(self)


_CLASS_ORDER = (BehaviorClass.BENIGN, BehaviorClass.COVERT, BehaviorClass.THREATENING)


class OrbitRegime(enum.Enum):
    LEO = "LEO"
    MEO = "MEO"
    GEO = "GEO"

    @property
    def index(self) -> int:
        return list(OrbitRegime).index(self)


@dataclass(frozen=True)
class OrbitalElements:
    semi_major_axis: float
    eccentricity: float
    inclination: float
    raan: float
    arg_perigee: float
    true_anomaly: float
    epoch: float = 0.0

    def __post_init__(self):
        if not self.semi_major_axis > R_EARTH:
            raise OrbitDomainError(f"semi-major axis {self.semi_major_axis} m is inside the Earth")
        if not 0.0 <= self.eccentricity < 1.0:
            raise OrbitDomainError(f"eccentricity {self.eccentricity} is not elliptic")
        for name in ("inclination", "raan", "arg_perigee", "true_anomaly"):
            object.__setattr__(self, name, float(getattr(self, name)) % _TWO_PI)

    @property
    def period(self) -> float:
        return _TWO_PI * math.sqrt(self.semi_major_axis**3 / MU_EARTH)


@dataclass(frozen=True)
class StateVector:
    t: float
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(3))

    @property
    def specific_energy(self) -> float:
        return specific_energy(self.position, self.velocity)

    @property
    def angular_momentum(self) -> np.ndarray:
        return np.cross(self.position, self.velocity)


@dataclass(frozen=True)
class ManeuverSpec:
    t_burn: float
    delta_v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "delta_v", np.asarray(self.delta_v, dtype=float).reshape(3))


@dataclass(frozen=True)
class RegimeBands:
    """Altitude bands (m above the equatorial radius) and GEO proximity window.

    ``geo_window`` bounds the initial attacker-target separation (m) for
    GEO-regime attackers.
    """

    leo: tuple[float, float] = (400e3, 2_000e3)
    meo: tuple[float, float] = (10_000e3, 20_000e3)
    geo_window: tuple[float, float] = (10e3, 500e3)
    leo_max_eccentricity: float = 0.01
    meo_max_eccentricity: float = 0.03
    leo_max_inclination_deg: float = 98.0
    meo_max_inclination_deg: float = 65.0

    def __post_init__(self):
        for name in ("leo", "meo", "geo_window"):
            lo, hi = getattr(self, name)
            if not 0.0 <= lo < hi:
                raise ConfigurationError(f"band {name}={lo, hi} needs 0 <= min < max")
        if self.leo[1] >= self.meo[0]:
            raise ConfigurationError("LEO band must lie below the MEO band")
        if R_EARTH + self.meo[1] >= A_GEO - self.geo_window[1]:
            raise ConfigurationError("MEO band must lie below the GEO proximity shell")

    def altitude_band(self, regime: OrbitRegime) -> tuple[float, float]:
        if regime is OrbitRegime.LEO:
            return self.leo
        if regime is OrbitRegime.MEO:
            return self.meo
        return (A_GEO - R_EARTH - self.geo_window[1], A_GEO - R_EARTH + self.geo_window[1])


@dataclass(frozen=True)
class DeltaVPrior:
    """Class-conditional impulse prior.

    Magnitude ~ U(low, high). Direction is isotropic when ``lobe`` is None,
    otherwise drawn from a cos**lobe lobe around the attacker-to-target line
    of sight (lobe=1 is the cosine-weighted hemisphere).
    """

    low: float
    high: float
    lobe: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.low < self.high:
            raise ConfigurationError(f"delta-v prior needs 0 <= low < high, got {self.low, self.high}")
        if self.lobe is not None and self.lobe < 0:
            raise ConfigurationError("lobe exponent must be non-negative")


def default_dv_priors() -> dict[BehaviorClass, DeltaVPrior]:
    return {
        BehaviorClass.BENIGN: DeltaVPrior(0.0, 0.5, None),
        BehaviorClass.COVERT: DeltaVPrior(0.5, 5.0, 1.0),
        BehaviorClass.THREATENING: DeltaVPrior(2.0, 10.0, 8.0),
    }


# --- element / state conversions -------------------------------------------

def _perifocal_to_eci(raan: float, inc: float, argp: float) -> np.ndarray:
    cO, sO = math.cos(raan), math.sin(raan)
    ci, si = math.cos(inc), math.sin(inc)
    cw, sw = math.cos(argp), math.sin(argp)
    return np.array([
        [cO * cw - sO * sw * ci, -cO * sw - sO * cw * ci, sO * si],
        [sO * cw + cO * sw * ci, -sO * sw + cO * cw * ci, -cO * si],
        [sw * si, cw * si, ci],
    ])


def elements_to_state(el: OrbitalElements) -> StateVector:
    """State at ``el.epoch`` from classical elements."""
    a, e, nu = el.semi_major_axis, el.eccentricity, el.true_anomaly
    p = a * (1.0 - e * e)
    r = p / (1.0 + e * math.cos(nu))
    r_pf = np.array([r * math.cos(nu), r * math.sin(nu), 0.0])
    v_pf = math.sqrt(MU_EARTH / p) * np.array([-math.sin(nu), e + math.cos(nu), 0.0])
    rot = _perifocal_to_eci(el.raan, el.inclination, el.arg_perigee)
    return StateVector(el.epoch, rot @ r_pf, rot @ v_pf)


def state_to_elements(state: StateVector, tol: float = 1e-11) -> OrbitalElements:
    """Classical elements of a bound state.

    Conventions at the singular points: equatorial orbits take raan = 0 and
    circular orbits take arg_perigee = 0, so the true anomaly absorbs the
    undefined angle and the round trip through ``elements_to_state`` holds.
    """
    r, v = state.position, state.velocity
    rn = np.linalg.norm(r)
    energy = specific_energy(r, v)
    if energy >= 0.0:
        raise OrbitDomainError("state is not bound (specific energy >= 0)")
    h = np.cross(r, v)
    hn = np.linalg.norm(h)
    a = -MU_EARTH / (2.0 * energy)
    e_vec = np.cross(v, h) / MU_EARTH - r / rn
    e = float(np.linalg.norm(e_vec))
    inc = math.acos(np.clip(h[2] / hn, -1.0, 1.0))
    node = np.array([-h[1], h[0], 0.0])
    nn = np.linalg.norm(node)

    if nn > tol * hn:
        raan = math.atan2(node[1], node[0])
        n_hat = node / nn
    else:
        raan = 0.0
        n_hat = np.array([1.0, 0.0, 0.0])
    # in-plane reference axes: n_hat and m_hat = h_hat x n_hat
    m_hat = np.cross(h / hn, n_hat)

    if e > tol:
        argp = math.atan2(np.dot(e_vec, m_hat), np.dot(e_vec, n_hat))
        e_hat = e_vec / e
        q_hat = np.cross(h / hn, e_hat)
        nu = math.atan2(np.dot(r, q_hat), np.dot(r, e_hat))
    else:
        e = 0.0
        argp = 0.0
        nu = math.atan2(np.dot(r, m_hat), np.dot(r, n_hat))
    return OrbitalElements(a, e, inc, raan, argp, nu, epoch=state.t)


def specific_energy(position, velocity):
    """v^2/2 - mu/r; broadcasts over leading axes."""
    r = np.linalg.norm(position, axis=-1)
    v = np.linalg.norm(velocity, axis=-1)
    return 0.5 * v * v - MU_EARTH / r


# --- propagation ------------------------------------------------------------

def propagate_state(state: StateVector, times) -> tuple[np.ndarray, np.ndarray]:
    """Positions and velocities (N, 3) at absolute ``times`` on the conic through ``state``.

    Solves the eccentric-anomaly-difference form of Kepler's equation by
    Newton iteration to KEPLER_TOL, then applies the f and g functions.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    r0v = state.position
    v0v = state.velocity
    r0 = float(np.linalg.norm(r0v))
    energy = specific_energy(r0v, v0v)
    if energy >= 0.0:
        raise OrbitDomainError("hyperbolic or parabolic state cannot be propagated")
    a = -MU_EARTH / (2.0 * energy)
    sqrt_mu = math.sqrt(MU_EARTH)
    sigma0 = float(np.dot(r0v, v0v)) / sqrt_mu
    n = math.sqrt(MU_EARTH / a**3)
    dt = times - state.t
    M = n * dt

    c1 = sigma0 / math.sqrt(a)
    c2 = 1.0 - r0 / a
    dE = M.copy()
    for _ in range(60):
        f = dE + c1 * (1.0 - np.cos(dE)) - c2 * np.sin(dE) - M
        fp = 1.0 + c1 * np.sin(dE) - c2 * np.cos(dE)
        step = f / fp
        dE -= step
        if np.max(np.abs(step), initial=0.0) < KEPLER_TOL:
            break
    else:
        raise OrbitDomainError("Kepler iteration did not converge")

    cos_dE, sin_dE = np.cos(dE), np.sin(dE)
    r = a + (r0 - a) * cos_dE + sigma0 * math.sqrt(a) * sin_dE
    f = 1.0 - a / r0 * (1.0 - cos_dE)
    g = dt - math.sqrt(a**3 / MU_EARTH) * (dE - sin_dE)
    fdot = -math.sqrt(MU_EARTH * a) / (r * r0) * sin_dE
    gdot = 1.0 - a / r * (1.0 - cos_dE)
    pos = f[:, None] * r0v + g[:, None] * v0v
    vel = fdot[:, None] * r0v + gdot[:, None] * v0v
    return pos, vel


def propagate(elements: OrbitalElements, t: float) -> StateVector:
    """Two-body state at absolute time ``t`` (s)."""
    if t < 0:
        raise ValueError("propagation time must be non-negative")
    if elements.eccentricity >= 1.0:
        raise OrbitDomainError("hyperbolic elements")
    pos, vel = propagate_state(elements_to_state(elements), [t])
    return StateVector(float(t), pos[0], vel[0])


def apply_impulse(state: StateVector, spec: ManeuverSpec) -> StateVector:
    if state.t != spec.t_burn:
        raise ValueError(f"state epoch {state.t} differs from burn time {spec.t_burn}")
    return StateVector(state.t, state.position.copy(), state.velocity + spec.delta_v)


def propagate_with_maneuver(elements: OrbitalElements, spec: ManeuverSpec | None, times):
    """Positions/velocities over ``times`` with the impulse applied at ``spec.t_burn``.

    Samples at or after the burn come from the post-burn conic.
    """
    times = np.asarray(times, dtype=float)
    s0 = elements_to_state(elements)
    if spec is None:
        return propagate_state(s0, times)
    pre = times < spec.t_burn
    pos = np.empty((times.size, 3))
    vel = np.empty((times.size, 3))
    if pre.any():
        pos[pre], vel[pre] = propagate_state(s0, times[pre])
    pb, vb = propagate_state(s0, [spec.t_burn])
    burned = apply_impulse(StateVector(spec.t_burn, pb[0], vb[0]), spec)
    if (~pre).any():
        pos[~pre], vel[~pre] = propagate_state(burned, times[~pre])
    return pos, vel


# --- sampling ---------------------------------------------------------------

def geo_target_elements() -> OrbitalElements:
    """The fixed GEO target: circular, equatorial, on the +x axis at t = 0."""
    return OrbitalElements(A_GEO, 0.0, 0.0, 0.0, 0.0, 0.0)


def sample_orbit(regime: OrbitRegime, behavior: BehaviorClass, rng: np.random.Generator,
                 bands: RegimeBands | None = None) -> OrbitalElements:
    """Random attacker elements for a regime.

    LEO/MEO draw altitude, eccentricity and orientation inside the band.
    GEO places the attacker at a separation inside ``bands.geo_window`` from
    the target on a near-circular, near-equatorial orbit. ``behavior`` is
    accepted so class-specific placement can be configured; the default
    bands treat all classes alike.
    """
    bands = bands or RegimeBands()
    if regime is OrbitRegime.GEO:
        return _sample_geo_neighbour(rng, bands)

    lo, hi = bands.altitude_band(regime)
    if regime is OrbitRegime.LEO:
        e_max, i_max = bands.leo_max_eccentricity, bands.leo_max_inclination_deg
    else:
        e_max, i_max = bands.meo_max_eccentricity, bands.meo_max_inclination_deg
    a = R_EARTH + rng.uniform(lo, hi)
    e = rng.uniform(0.0, e_max)
    inc = math.radians(rng.uniform(0.0, i_max))
    raan, argp, nu = rng.uniform(0.0, _TWO_PI, size=3)
    return OrbitalElements(a, e, inc, raan, argp, nu)


def _sample_geo_neighbour(rng: np.random.Generator, bands: RegimeBands) -> OrbitalElements:
    target = elements_to_state(geo_target_elements())
    sep = rng.uniform(*bands.geo_window)
    # offset mostly in the orbital plane (along-track/radial), small out-of-plane part
    phi = rng.uniform(0.0, _TWO_PI)
    z = rng.uniform(-0.2, 0.2)
    offset = sep * np.array([math.sqrt(1 - z * z) * math.cos(phi), math.sqrt(1 - z * z) * math.sin(phi), z])
    pos = target.position + offset
    rn = np.linalg.norm(pos)
    # near-circular prograde velocity with small inclination and speed dispersion
    h_hat = np.array([0.0, 0.0, 1.0])
    tilt = math.radians(rng.normal(0.0, 0.05))
    r_hat = pos / rn
    h_hat = math.cos(tilt) * h_hat + math.sin(tilt) * np.cross(r_hat, h_hat)
    along = np.cross(h_hat, r_hat)
    along /= np.linalg.norm(along)
    speed = math.sqrt(MU_EARTH / rn) * (1.0 + rng.uniform(-2e-4, 2e-4))
    return state_to_elements(StateVector(0.0, pos, speed * along))


def sample_lobe_direction(axis, lobe: float | None, rng: np.random.Generator) -> np.ndarray:
    """Unit vector isotropic (lobe None) or cos**lobe-distributed about ``axis``."""
    if lobe is None:
        v = rng.standard_normal(3)
        return v / np.linalg.norm(v)
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    cos_t = rng.uniform() ** (1.0 / (lobe + 1.0))
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    az = rng.uniform(0.0, _TWO_PI)
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(axis, helper)
    u /= np.linalg.norm(u)
    w = np.cross(axis, u)
    return cos_t * axis + sin_t * (math.cos(az) * u + math.sin(az) * w)


def sample_maneuver(prior: DeltaVPrior, t_burn: float, line_of_sight, rng: np.random.Generator) -> ManeuverSpec:
    mag = rng.uniform(prior.low, prior.high)
    direction = sample_lobe_direction(line_of_sight, prior.lobe, rng)
    return ManeuverSpec(float(t_burn), mag * direction)
