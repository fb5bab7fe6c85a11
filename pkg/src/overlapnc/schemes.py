"""Class-based coding schemes: classes of data-packet indices plus a
selection distribution over them.

Packet indices are 0-based. Every constructor returns uniform selection
probabilities.
"""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np


class SchemeError(ValueError):
    """Invalid scheme parameters or a malformed scheme document."""


@dataclass(frozen=True)
class ClassScheme:
    k: int
    classes: tuple
    probs: tuple
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(
            self, "classes", tuple(tuple(sorted({int(i) for i in c})) for c in self.classes)
        )
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    @classmethod
    def uniform(cls, k, classes, name=""):
        classes = list(classes)
        return cls(k, classes, [1.0 / len(classes)] * len(classes), name)

    @property
    def L(self):
        return len(self.classes)

    @cached_property
    def sizes(self):
        return np.array([len(c) for c in self.classes], dtype=np.int64)

    @property
    def max_size(self):
        return int(self.sizes.max())

    @property
    def is_uniform(self):
        return all(p == self.probs[0] for p in self.probs)

    @cached_property
    def csr(self):
        """(cls_ptr, cls_idx, pk_ptr, pk_idx) incidence in both directions."""
        cls_ptr = np.zeros(self.L + 1, dtype=np.int64)
        np.cumsum(self.sizes, out=cls_ptr[1:])
        cls_idx = np.fromiter(
            (i for c in self.classes for i in c), dtype=np.int64, count=int(cls_ptr[-1])
        )
        owner = np.repeat(np.arange(self.L, dtype=np.int64), self.sizes)
        order = np.argsort(cls_idx, kind="stable")
        pk_idx = owner[order]
        counts = np.bincount(cls_idx, minlength=self.k)
        pk_ptr = np.zeros(self.k + 1, dtype=np.int64)
        np.cumsum(counts, out=pk_ptr[1:])
        return cls_ptr, cls_idx, pk_ptr, pk_idx

    def classes_of(self, i):
        """Indices of the classes containing packet ``i``."""
        _, _, pk_ptr, pk_idx = self.csr
        return pk_idx[pk_ptr[i]:pk_ptr[i + 1]].tolist()

    def exact_probs(self):
        """Selection probabilities as Fractions (uniform ones are exact)."""
        if self.is_uniform:
            return [Fraction(1, self.L)] * self.L
        return [Fraction(p).limit_denominator(10**12) for p in self.probs]

    def to_dict(self):
        doc = {"k": self.k, "classes": [list(c) for c in self.classes], "probs": list(self.probs)}
        if self.name:
            doc["name"] = self.name
        return doc

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(doc["k"], doc["classes"], doc["probs"], doc.get("name", ""))
        except (KeyError, TypeError, ValueError) as e:
            raise SchemeError(f"malformed scheme document: {e}") from e

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemeError(f"malformed scheme JSON: {e}") from e
        if not isinstance(doc, dict):
            raise SchemeError("scheme JSON must be an object")
        return cls.from_dict(doc)


def save_scheme(scheme, path):
    with open(path, "w") as f:
        json.dump(scheme.to_dict(), f)
        f.write("\n")


def load_scheme(path):
    with open(path) as f:
        return ClassScheme.from_json(f.read())


def make_chunked(k, d):
    if d < 1 or k % d:
        raise SchemeError(f"class size {d} does not divide k={k}")
    classes = [range(i * d, (i + 1) * d) for i in range(k // d)]
    return ClassScheme.uniform(k, classes, f"chunked(k={k},d={d})")


def make_rect_grid(k, d, d2):
    """``d2 x d`` grid: d2 row classes of size d, d column classes of size d2."""
    if d < 1 or d2 < 1 or k != d * d2:
        raise SchemeError(f"k={k} != d*d'={d}*{d2}")
    rows = [range(i * d, (i + 1) * d) for i in range(d2)]
    cols = [range(j, k, d) for j in range(d)]
    return ClassScheme.uniform(k, rows + cols, f"rect-grid(k={k},d={d},d'={d2})")


def angle_set(theta, layers, L0):
    return [(s * theta) % L0 for s in range(layers)]


def make_diag_grid(k, d, L, angles):
    """Diagonal grid code with one shear angle per layer of L0 = k/d classes.

    Class l lies in layer s = l // L0 at offset i = l % L0 and holds
    ((i + j*theta_s) * d + j) mod k for j < d.
    """
    if d < 1 or k % d:
        raise SchemeError(f"class size {d} does not divide k={k}")
    L0 = k // d
    if not L0 <= L <= L0 * L0:
        raise SchemeError(f"need L0 <= L <= L0^2 (L0={L0}), got L={L}")
    layers = -(-L // L0)
    angles = [int(a) for a in angles]
    if len(angles) != layers:
        raise SchemeError(f"need {layers} angles for L={L}, L0={L0}; got {len(angles)}")
    for a in angles:
        if a % L0 and math.gcd(a % L0, L0) != 1:
            raise SchemeError(f"angle {a} is not coprime with L0={L0}")
    classes = []
    for ell in range(L):
        i, s = ell % L0, ell // L0
        th = angles[s]
        classes.append([((i + j * th) * d + j) % k for j in range(d)])
    name = f"diag-grid(k={k},d={d},L={L},angles={','.join(map(str, angles))})"
    return ClassScheme.uniform(k, classes, name)


def make_diag_grid_angle(k, d, L, theta):
    """Diagonal grid with angle set {0, theta, 2*theta, ...} mod L0."""
    if d < 1 or k % d:
        raise SchemeError(f"class size {d} does not divide k={k}")
    L0 = k // d
    return make_diag_grid(k, d, L, angle_set(theta, -(-L // L0), L0))


def make_random_layer(k, d, L, seed):
    """Layers of chunked classes over seeded uniform permutations (layer 0 is identity)."""
    if d < 1 or k % d:
        raise SchemeError(f"class size {d} does not divide k={k}")
    L0 = k // d
    if L < L0:
        raise SchemeError(f"L={L} < L0={L0} leaves packets uncovered")
    rng = np.random.default_rng(seed)
    perms = [np.arange(k)]
    for _ in range(1, -(-L // L0)):
        perms.append(rng.permutation(k))
    classes = []
    for ell in range(L):
        i, s = ell % L0, ell // L0
        classes.append(perms[s][i * d:(i + 1) * d])
    return ClassScheme.uniform(k, classes, f"random-layer(k={k},d={d},L={L},seed={seed})")


def random_subset(k, D, rng):
    """Uniform D-subset of range(k) by partial Fisher-Yates."""
    a = np.arange(k)
    for i in range(D):
        j = int(rng.integers(i, k))
        a[i], a[j] = a[j], a[i]
    return np.sort(a[:D])


def make_mixed(base, big_class_size, seed, d_min=1):
    """Append one uniformly random class of ``big_class_size`` members."""
    D = int(big_class_size)
    if not max(1, d_min) <= D <= base.k:
        raise SchemeError(f"big class size {D} outside [{d_min}, {base.k}]")
    extra = random_subset(base.k, D, np.random.default_rng(seed))
    name = f"mixed({base.name or 'base'}+{D},seed={seed})"
    return ClassScheme.uniform(base.k, list(base.classes) + [extra], name)


def validate(scheme, d_min=1):
    """Return a list of human-readable violations (empty when valid)."""
    out = []
    k = scheme.k
    if k < 1:
        out.append(f"k={k} must be positive")
    if scheme.L == 0:
        out.append("scheme has no classes")
    covered = set()
    for ell, c in enumerate(scheme.classes):
        if not c:
            out.append(f"class {ell} is empty")
            continue
        if c[0] < 0 or c[-1] >= k:
            out.append(f"class {ell} has members outside 0..{k - 1}")
        if len(c) < d_min:
            out.append(f"class {ell} has size {len(c)} < d_min={d_min}")
        covered.update(c)
    missing = set(range(k)) - covered
    if missing:
        out.append(f"{len(missing)} packets belong to no class (e.g. {min(missing)})")
    if len(scheme.probs) != scheme.L:
        out.append(f"{len(scheme.probs)} probabilities for {scheme.L} classes")
    if any(p < 0 for p in scheme.probs):
        out.append("negative selection probability")
    total = math.fsum(scheme.probs)
    if abs(total - 1.0) > 1e-12:
        out.append(f"probabilities sum to {total!r}, not 1")
    return out


@dataclass
class OverlapReport:
    pairwise_intersections: np.ndarray
    packet_degrees: np.ndarray
    max_degree: int
    min_degree: int

    @property
    def max_offdiag(self):
        P = self.pairwise_intersections
        if P.shape[0] < 2:
            return 0
        return int((P - np.diag(np.diag(P))).max())

    def summary(self):
        return (
            f"packet degree {self.min_degree}..{self.max_degree}, "
            f"max pairwise overlap {self.max_offdiag}"
        )


def overlap_report(scheme):
    inc = np.zeros((scheme.L, scheme.k), dtype=np.int64)
    cls_ptr, cls_idx, _, _ = scheme.csr
    rows = np.repeat(np.arange(scheme.L), scheme.sizes)
    inc[rows, cls_idx] = 1
    deg = inc.sum(axis=0)
    return OverlapReport(inc @ inc.T, deg, int(deg.max()), int(deg.min()))


def complexity_bound(scheme):
    """Worst-case decoding multiplications per symbol, as an exact Fraction.

    Largest classes first: with t the smallest count whose sizes reach k,
    bound = d_t + (1/k) * sum_{i<t} d_i (d_i - d_t).
    """
    sizes = sorted((len(c) for c in scheme.classes), reverse=True)
    k = scheme.k
    acc = 0
    for t, dt in enumerate(sizes):
        acc += dt
        if acc >= k:
            head = sizes[:t]
            return dt + Fraction(sum(di * (di - dt) for di in head), k)
    raise SchemeError("classes do not cover k packets")


def header_cost(scheme, q=256):
    """Header symbols per packet: class index plus the largest coding vector.

    The index field always occupies at least one symbol.
    """
    if q < 2:
        raise SchemeError("q must be at least 2")
    digits, span = 0, 1
    while span < scheme.L:
        span *= q
        digits += 1
    return max(1, digits) + scheme.max_size
