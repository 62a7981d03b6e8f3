"""
Synthetic Ground-Truth Manifolds
Parametric manifolds with exact nearest-point maps, tangent and normal frames.

Every curved manifold is scaled to unit reach at construction. Shape
parameters are kept as given and the scale factor is recorded. Manifolds can
be embedded in a larger ambient space through the first native coordinates,
followed by a fixed random rotation when a rotation seed is given.
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from recon.errors import DomainError, MedialAxis
from recon.geometry.linalg import complement_frame, random_rotation

TWO_PI = 2.0 * math.pi
MEDIAL_GUARD = 1e-9
ON_MANIFOLD_TOL = 1e-9

KINDS = ("circle", "sphere2", "torus3", "flat_torus4", "trig_curve", "flat")

DEFAULT_PARAMS = {
    "circle": {"r": 1.0},
    "sphere2": {"r": 1.0},
    "torus3": {"R": 3.0, "r": 1.0},
    "flat_torus4": {"r": 1.0},
    "trig_curve": {"frequencies": [1, 2], "amplitudes": [1.0, 0.5]},
    "flat": {"m": 2},
}


class SyntheticManifold:
    """A compact (or flat) smooth manifold with known geometry."""

    def __init__(self, kind: str, ambient_dim: int, params: Optional[Dict] = None,
                 seed: Optional[int] = None):
        """
        Build a manifold.

        Args:
            kind: one of KINDS
            ambient_dim: d, must be at least the native embedding dimension
            params: shape parameters, merged over DEFAULT_PARAMS[kind]
            seed: rotation seed; None keeps the native coordinate axes
        """
        if kind not in KINDS:
            raise DomainError(f"unknown manifold kind '{kind}' (expected one of {', '.join(KINDS)})")

        self.kind = kind
        self.params = {**DEFAULT_PARAMS[kind], **(params or {})}
        self.seed = seed
        self.ambient_dim = int(ambient_dim)

        self._setup_shape()

        if self.ambient_dim < self.native_dim or self.intrinsic_dim >= self.ambient_dim:
            raise DomainError(
                f"{kind} needs ambient dimension > {self.intrinsic_dim} and >= {self.native_dim}, "
                f"got {self.ambient_dim}"
            )

        if seed is None:
            self.rotation = np.eye(self.ambient_dim)
        else:
            self.rotation = random_rotation(np.random.default_rng(seed), self.ambient_dim)

    # ------------------------------------------------------------------
    # Shape setup
    # ------------------------------------------------------------------

    def _setup_shape(self):
        p = self.params
        kind = self.kind

        if kind == "circle":
            self._require_positive("r")
            self.intrinsic_dim, self.native_dim = 1, 2
            raw_reach = p["r"]
        elif kind == "sphere2":
            self._require_positive("r")
            self.intrinsic_dim, self.native_dim = 2, 3
            raw_reach = p["r"]
        elif kind == "torus3":
            self._require_positive("R")
            self._require_positive("r")
            if not p["R"] > p["r"]:
                raise DomainError("torus3 needs R > r")
            self.intrinsic_dim, self.native_dim = 2, 3
            raw_reach = min(p["r"], p["R"] - p["r"])
        elif kind == "flat_torus4":
            self._require_positive("r")
            p.setdefault("r2", p["r"])
            self._require_positive("r2")
            self.intrinsic_dim, self.native_dim = 2, 4
            raw_reach = min(p["r"], p["r2"])
        elif kind == "trig_curve":
            freqs = [int(f) for f in p["frequencies"]]
            amps = [float(a) for a in p.get("amplitudes") or [1.0] * len(freqs)]
            if not freqs or len(amps) != len(freqs):
                raise DomainError("trig_curve needs matching frequency and amplitude lists")
            if min(freqs) < 1 or len(set(freqs)) != len(freqs) or math.gcd(*freqs) != 1:
                raise DomainError("trig_curve frequencies must be distinct positive integers with gcd 1")
            if min(amps) <= 0:
                raise DomainError("trig_curve amplitudes must be positive")
            p["frequencies"], p["amplitudes"] = freqs, amps
            self.intrinsic_dim, self.native_dim = 1, 2 * len(freqs)
            self._freqs = np.array(freqs, dtype=float)
            self._amps = np.array(amps, dtype=float)
            self._curve_scale = 1.0
            raw_reach = self._trig_reach()
        else:  # flat
            m = int(p["m"])
            if m < 1:
                raise DomainError("flat needs m >= 1")
            p["m"] = m
            self.intrinsic_dim, self.native_dim = m, m
            raw_reach = math.inf

        if raw_reach <= 1e-6:
            raise DomainError(f"{self.kind} has (near) zero reach; check its parameters")

        self.scale = 1.0 if math.isinf(raw_reach) else 1.0 / raw_reach
        self.reach = raw_reach * self.scale
        if kind == "trig_curve":
            self._curve_scale = self.scale

    def _require_positive(self, key: str):
        value = float(self.params[key])
        if not value > 0 or not math.isfinite(value):
            raise DomainError(f"{self.kind} parameter {key} must be positive, got {value}")
        self.params[key] = value

    def _length(self, key: str) -> float:
        return self.params[key] * self.scale

    def _trig_reach(self, n: int = 2048) -> float:
        # Federer: reach = inf over p != q of |q - p|^2 / (2 dist(q - p, T_p))
        u = np.linspace(0.0, TWO_PI, n, endpoint=False)
        P = self._trig_points(u)
        T = self._trig_velocity(u)
        T /= np.linalg.norm(T, axis=1, keepdims=True)

        best = math.inf
        for start in range(0, n, 128):
            rows = slice(start, min(start + 128, n))
            D = P[None, :, :] - P[rows, None, :]
            sq = np.einsum("ijk,ijk->ij", D, D)
            along = np.einsum("ijk,ik->ij", D, T[rows])
            perp = np.sqrt(np.maximum(sq - along ** 2, 0.0))
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(perp > 1e-14, sq / (2.0 * perp), np.inf)
            best = min(best, float(ratio.min()))
        return best

    # ------------------------------------------------------------------
    # Native coordinates
    # ------------------------------------------------------------------

    def _trig_points(self, u: np.ndarray) -> np.ndarray:
        phase = np.outer(u, self._freqs)
        out = np.empty((len(u), self.native_dim))
        out[:, 0::2] = self._amps * np.cos(phase)
        out[:, 1::2] = self._amps * np.sin(phase)
        return out * self._curve_scale

    def _trig_velocity(self, u: np.ndarray) -> np.ndarray:
        phase = np.outer(u, self._freqs)
        out = np.empty((len(u), self.native_dim))
        out[:, 0::2] = -self._amps * self._freqs * np.sin(phase)
        out[:, 1::2] = self._amps * self._freqs * np.cos(phase)
        return out * self._curve_scale

    def _trig_acceleration(self, u: np.ndarray) -> np.ndarray:
        phase = np.outer(u, self._freqs)
        out = np.empty((len(u), self.native_dim))
        out[:, 0::2] = -self._amps * self._freqs ** 2 * np.cos(phase)
        out[:, 1::2] = -self._amps * self._freqs ** 2 * np.sin(phase)
        return out * self._curve_scale

    def _native_embed(self, U: np.ndarray) -> np.ndarray:
        kind = self.kind
        if kind == "circle":
            r = self._length("r")
            u = U[:, 0]
            return np.column_stack([r * np.cos(u), r * np.sin(u)])
        if kind == "sphere2":
            r = self._length("r")
            theta, phi = U[:, 0], U[:, 1]
            return r * np.column_stack([np.sin(theta) * np.cos(phi),
                                        np.sin(theta) * np.sin(phi),
                                        np.cos(theta)])
        if kind == "torus3":
            R, r = self._length("R"), self._length("r")
            u, v = U[:, 0], U[:, 1]
            ring = R + r * np.cos(v)
            return np.column_stack([ring * np.cos(u), ring * np.sin(u), r * np.sin(v)])
        if kind == "flat_torus4":
            r, r2 = self._length("r"), self._length("r2")
            u, v = U[:, 0], U[:, 1]
            return np.column_stack([r * np.cos(u), r * np.sin(u), r2 * np.cos(v), r2 * np.sin(v)])
        if kind == "trig_curve":
            return self._trig_points(U[:, 0])
        return U.copy()

    def _native_jacobian(self, U: np.ndarray) -> np.ndarray:
        """(n, native_dim, m) derivative of the native embedding."""
        kind = self.kind
        n = U.shape[0]
        if kind == "circle":
            r = self._length("r")
            u = U[:, 0]
            return (r * np.column_stack([-np.sin(u), np.cos(u)]))[:, :, None]
        if kind == "sphere2":
            r = self._length("r")
            theta, phi = U[:, 0], U[:, 1]
            d_theta = r * np.column_stack([np.cos(theta) * np.cos(phi),
                                           np.cos(theta) * np.sin(phi),
                                           -np.sin(theta)])
            d_phi = r * np.column_stack([-np.sin(theta) * np.sin(phi),
                                         np.sin(theta) * np.cos(phi),
                                         np.zeros(n)])
            return np.stack([d_theta, d_phi], axis=2)
        if kind == "torus3":
            R, r = self._length("R"), self._length("r")
            u, v = U[:, 0], U[:, 1]
            ring = R + r * np.cos(v)
            d_u = np.column_stack([-ring * np.sin(u), ring * np.cos(u), np.zeros(n)])
            d_v = r * np.column_stack([-np.sin(v) * np.cos(u), -np.sin(v) * np.sin(u), np.cos(v)])
            return np.stack([d_u, d_v], axis=2)
        if kind == "flat_torus4":
            r, r2 = self._length("r"), self._length("r2")
            u, v = U[:, 0], U[:, 1]
            zeros = np.zeros(n)
            d_u = np.column_stack([-r * np.sin(u), r * np.cos(u), zeros, zeros])
            d_v = np.column_stack([zeros, zeros, -r2 * np.sin(v), r2 * np.cos(v)])
            return np.stack([d_u, d_v], axis=2)
        if kind == "trig_curve":
            return self._trig_velocity(U[:, 0])[:, :, None]
        return np.broadcast_to(np.eye(self.native_dim), (n, self.native_dim, self.native_dim)).copy()

    def _to_native(self, X: np.ndarray) -> np.ndarray:
        return X @ self.rotation

    def _from_native(self, Y: np.ndarray) -> np.ndarray:
        padded = np.zeros(Y.shape[:-1] + (self.ambient_dim,))
        padded[..., :self.native_dim] = Y
        return padded @ self.rotation.T

    # ------------------------------------------------------------------
    # Parameter space
    # ------------------------------------------------------------------

    def param_box(self) -> List[Tuple[float, float]]:
        """Default parameter ranges."""
        if self.kind == "sphere2":
            return [(0.0, math.pi), (0.0, TWO_PI)]
        if self.kind == "flat":
            return [(-1.0, 1.0)] * self.intrinsic_dim
        return [(0.0, TWO_PI)] * self.intrinsic_dim

    @property
    def periodic(self) -> Tuple[bool, ...]:
        if self.kind == "sphere2":
            return (False, True)
        if self.kind == "flat":
            return (False,) * self.intrinsic_dim
        return (True,) * self.intrinsic_dim

    @property
    def max_speed(self) -> Tuple[float, ...]:
        """Upper bound on ‖∂embed/∂u_j‖ for each parameter."""
        kind = self.kind
        if kind == "circle":
            return (self._length("r"),)
        if kind == "sphere2":
            return (self._length("r"),) * 2
        if kind == "torus3":
            return (self._length("R") + self._length("r"), self._length("r"))
        if kind == "flat_torus4":
            return (self._length("r"), self._length("r2"))
        if kind == "trig_curve":
            return (float(np.sum(self._amps * self._freqs)) * self._curve_scale,)
        return (1.0,) * self.intrinsic_dim

    def min_speed(self, box: Sequence[Tuple[float, float]], n: int = 33) -> np.ndarray:
        """Smallest ‖∂embed/∂u_j‖ per parameter over a coarse grid of `box`."""
        U = self._grid(box, [n] * self.intrinsic_dim, [False] * self.intrinsic_dim)
        speeds = np.linalg.norm(self._native_jacobian(U), axis=1)
        return speeds.min(axis=0)

    def interior_box(self, region: Optional[Sequence[Tuple[float, float]]],
                     margin: float) -> List[Tuple[float, float]]:
        """
        Shrink a sampling region so that every point of the result lies at
        least `margin` (ambient length, estimated through the parametrization
        speed) away from the region boundary. A missing region means the whole
        manifold, which has no boundary.
        """
        if region is None:
            return self.param_box()

        speeds = self.min_speed(region)
        box = []
        for (lo, hi), speed in zip(region, speeds):
            pad = margin / speed if speed > 0 else math.inf
            if lo + pad >= hi - pad:
                raise DomainError(f"region [{lo}, {hi}] is too small for a margin of {margin}")
            box.append((lo + pad, hi - pad))
        return box

    @staticmethod
    def _grid(box, counts, periodic) -> np.ndarray:
        axes = [np.linspace(lo, hi, count, endpoint=not wrap)
                for (lo, hi), count, wrap in zip(box, counts, periodic)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([g.ravel() for g in mesh])

    def param_grid(self, box: Sequence[Tuple[float, float]], spacing: Sequence[float]) -> np.ndarray:
        """Regular parameter grid over `box` with at most the given spacing per parameter."""
        counts, wraps = [], []
        for (lo, hi), step, periodic in zip(box, spacing, self.periodic):
            full_period = periodic and math.isclose(hi - lo, TWO_PI)
            n = max(int(math.ceil((hi - lo) / step)), 1)
            counts.append(n if full_period else n + 1)
            wraps.append(full_period)
        return self._grid(box, counts, wraps)

    def random_params(self, rng: np.random.Generator, n: int,
                      box: Optional[Sequence[Tuple[float, float]]] = None) -> np.ndarray:
        box = box or self.param_box()
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        return lo + (hi - lo) * rng.random((n, len(box)))

    # ------------------------------------------------------------------
    # Geometry
    # ------------------------------------------------------------------

    def embed_many(self, U) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if U.shape[1] != self.intrinsic_dim:
            raise DomainError(f"{self.kind} takes {self.intrinsic_dim} parameters, got {U.shape[1]}")
        return self._from_native(self._native_embed(U))

    def embed(self, u) -> np.ndarray:
        """Point of M at parameter vector u."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if u.ndim != 1 or u.shape[0] != self.intrinsic_dim:
            raise DomainError(f"{self.kind} takes {self.intrinsic_dim} parameters, got {u.shape}")
        return self.embed_many(u[None, :])[0]

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ambient_dim,):
            raise DomainError(f"expected a point in R^{self.ambient_dim}, got shape {x.shape}")
        return x

    def nearest_point(self, x) -> np.ndarray:
        """
        ν(x): the point of M nearest to x.

        Raises:
            MedialAxis: x is within 1e-9·reach of the medial axis
        """
        x = self._check_point(x)
        y = self._to_native(x)[:self.native_dim]
        guard = MEDIAL_GUARD * self.reach
        kind = self.kind

        if kind in ("circle", "sphere2"):
            rho = np.linalg.norm(y)
            if rho <= guard:
                raise MedialAxis(f"{kind} center is equidistant from every point")
            z = self._length("r") * y / rho
        elif kind == "torus3":
            R, r = self._length("R"), self._length("r")
            rho = math.hypot(y[0], y[1])
            if rho <= guard:
                raise MedialAxis("point lies on the torus axis")
            w = np.array([rho - R, y[2]])
            w_norm = np.linalg.norm(w)
            if w_norm <= guard:
                raise MedialAxis("point lies on the torus core circle")
            ring = R + r * w[0] / w_norm
            z = np.array([ring * y[0] / rho, ring * y[1] / rho, r * w[1] / w_norm])
        elif kind == "flat_torus4":
            z = np.empty(4)
            for block, radius in ((slice(0, 2), self._length("r")), (slice(2, 4), self._length("r2"))):
                rho = np.linalg.norm(y[block])
                if rho <= guard:
                    raise MedialAxis("point lies on the flat torus medial axis")
                z[block] = radius * y[block] / rho
        elif kind == "trig_curve":
            u = self._nearest_curve_param(y)
            z = self._trig_points(np.array([u]))[0]
        else:
            z = y

        return self._from_native(z)

    def _nearest_curve_param(self, y: np.ndarray, n_grid: int = 4096) -> float:
        u_grid = np.linspace(0.0, TWO_PI, n_grid, endpoint=False)
        dist = np.linalg.norm(self._trig_points(u_grid) - y, axis=1)

        # refine every discrete local minimum that could compete with the best
        left, right = np.roll(dist, 1), np.roll(dist, -1)
        candidates = np.flatnonzero((dist <= left) & (dist <= right))
        spacing = TWO_PI / n_grid
        candidates = candidates[dist[candidates] <= dist.min() + 4.0 * spacing * self.max_speed[0]]

        refined = []
        for i in candidates:
            u = self._newton_curve_param(y, u_grid[i], spacing)
            refined.append((float(np.linalg.norm(self._trig_points(np.array([u]))[0] - y)), u))
        refined.sort()

        best_dist, best_u = refined[0]
        for other_dist, other_u in refined[1:]:
            gap = abs((other_u - best_u + math.pi) % TWO_PI - math.pi)
            if other_dist - best_dist <= MEDIAL_GUARD * self.reach and gap > 1e-6:
                raise MedialAxis("point has two nearest points on the curve")
        return best_u % TWO_PI

    def _newton_curve_param(self, y: np.ndarray, u: float, spacing: float) -> float:
        # minimize |c(u) - y|^2 / 2; steps clipped to one grid cell
        for _ in range(60):
            uu = np.array([u])
            diff = self._trig_points(uu)[0] - y
            vel = self._trig_velocity(uu)[0]
            acc = self._trig_acceleration(uu)[0]
            grad = vel @ diff
            curv = acc @ diff + vel @ vel
            if curv <= 0:
                delta = -math.copysign(spacing, grad)
            else:
                delta = float(np.clip(-grad / curv, -spacing, spacing))
            u += delta
            if abs(delta) <= 1e-16 * max(1.0, abs(u)):
                break
        return u

    def distance(self, x) -> float:
        """‖x - ν(x)‖."""
        x = self._check_point(x)
        return float(np.linalg.norm(x - self.nearest_point(x)))

    def _native_params(self, Y: np.ndarray) -> np.ndarray:
        """Parameters of native points assumed to lie on M."""
        kind = self.kind
        if kind == "circle":
            return np.arctan2(Y[:, 1], Y[:, 0])[:, None]
        if kind == "sphere2":
            r = self._length("r")
            theta = np.arccos(np.clip(Y[:, 2] / r, -1.0, 1.0))
            return np.column_stack([theta, np.arctan2(Y[:, 1], Y[:, 0])])
        if kind == "torus3":
            R = self._length("R")
            rho = np.hypot(Y[:, 0], Y[:, 1])
            return np.column_stack([np.arctan2(Y[:, 1], Y[:, 0]), np.arctan2(Y[:, 2], rho - R)])
        if kind == "flat_torus4":
            return np.column_stack([np.arctan2(Y[:, 1], Y[:, 0]), np.arctan2(Y[:, 3], Y[:, 2])])
        if kind == "trig_curve":
            return np.array([[self._nearest_curve_param(y)] for y in Y]).reshape(-1, 1)
        return Y.copy()

    def frames_at_params(self, U: np.ndarray) -> np.ndarray:
        """(n, d, m) orthonormal tangent frames at parameters U."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        J = self._native_jacobian(U)
        if self.kind == "sphere2":
            # the azimuth derivative vanishes at the poles; use n x ∂θ instead
            d_theta = J[:, :, 0] / np.linalg.norm(J[:, :, 0], axis=1, keepdims=True)
            normal = self._native_embed(U) / self._length("r")
            J = np.stack([d_theta, np.cross(normal, d_theta)], axis=2)
        padded = np.zeros((U.shape[0], self.ambient_dim, self.intrinsic_dim))
        padded[:, :self.native_dim, :] = J
        rotated = np.einsum("ij,njk->nik", self.rotation, padded)
        Q, _ = np.linalg.qr(rotated)
        return Q

    def tangent_frames(self, Z) -> np.ndarray:
        """Tangent frames at many points of M, (n, d, m)."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        return self.frames_at_params(self._native_params(self._to_native(Z)[:, :self.native_dim]))

    def _check_on_manifold(self, z) -> np.ndarray:
        z = self._check_point(z)
        if self.distance(z) > ON_MANIFOLD_TOL * max(1.0, float(np.linalg.norm(z))):
            raise DomainError("point does not lie on the manifold")
        return z

    def tangent_frame(self, z) -> np.ndarray:
        """d x m orthonormal frame of T_z."""
        z = self._check_on_manifold(z)
        return self.tangent_frames(z[None, :])[0]

    def normal_frame(self, z) -> np.ndarray:
        """d x (d - m) orthonormal frame of N_z."""
        return complement_frame(self.tangent_frame(z))

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def descriptor(self) -> Dict:
        """JSON record {kind, d, params, seed} with shape parameters before scaling."""
        params = {k: (list(v) if isinstance(v, (list, tuple)) else v) for k, v in self.params.items()}
        return {"kind": self.kind, "d": self.ambient_dim, "params": params, "seed": self.seed}

    @classmethod
    def from_descriptor(cls, record: Dict) -> "SyntheticManifold":
        try:
            return cls(record["kind"], int(record["d"]), record.get("params"), record.get("seed"))
        except (KeyError, TypeError) as e:
            raise DomainError(f"malformed manifold descriptor: {e}") from e

    def __repr__(self):
        return (f"SyntheticManifold(kind={self.kind!r}, d={self.ambient_dim}, m={self.intrinsic_dim}, "
                f"scale={self.scale:.6g})")
