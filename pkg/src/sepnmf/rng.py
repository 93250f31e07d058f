"""Deterministic, cross-platform random streams.

Every stochastic component of the package draws from a `Stream`, a
counter-based SplitMix64 generator.  The full state-transition spec lives in
docs/rng.md so that an independent implementation can reproduce the exact
values; the short version:

    mix64(z): z ^= z>>30; z *= 0xBF58476D1CE4E5B9; z ^= z>>27;
              z *= 0x94D049BB133111EB; z ^= z>>31        (mod 2^64)

    stream base  = fold(seed, labels)   (see `_derive`)
    k-th output  = mix64(base + (k+1)*0x9E3779B97F4A7C15)

Uniforms take the top 53 bits; normals come from Box-Muller pairs; gamma
variates use Marsaglia-Tsang with the U^(1/a) boost for shape < 1.  Streams
spawned from a parent depend only on the parent's base, never on how much the
parent has been consumed, so component draw order cannot perturb siblings.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z):
    """SplitMix64 finalizer on a Python int (mod 2^64)."""
    z &= _MASK
    z ^= z >> 30
    z = (z * _MIX1) & _MASK
    z ^= z >> 27
    z = (z * _MIX2) & _MASK
    z ^= z >> 31
    return z


def _mix64_array(z):
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z


def _label_u64(label):
    """Fold a stream label (int or short string) to a u64.

    Strings hash with FNV-1a over their UTF-8 bytes.
    """
    if isinstance(label, str):
        h = _FNV_OFFSET
        for byte in label.encode("utf-8"):
            h = ((h ^ byte) * _FNV_PRIME) & _MASK
        return h
    return int(label) & _MASK


def _derive(seed, labels):
    state = mix64(int(seed) & _MASK)
    for label in labels:
        state = mix64((state + _GOLDEN) ^ mix64(_label_u64(label)))
    return state


class Stream:
    """One deterministic random stream identified by (seed, *labels)."""

    def __init__(self, seed, *labels):
        self._base = _derive(seed, labels)
        self._count = 0

    def spawn(self, *labels):
        """Child stream; independent of how much of `self` was consumed."""
        child = Stream.__new__(Stream)
        child._base = _derive(self._base, labels)
        child._count = 0
        return child

    def u64(self, n):
        """Next `n` raw 64-bit outputs as a uint64 array."""
        ks = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        return _mix64_array(np.uint64(self._base) + ks * np.uint64(_GOLDEN))

    def uniforms(self, n):
        """`n` doubles in [0, 1) (top 53 bits of each output)."""
        return (self.u64(n) >> np.uint64(11)) * (2.0 ** -53)

    def uniform(self):
        return float(self.uniforms(1)[0])

    def normals(self, n):
        """`n` standard normals via Box-Muller.

        Pairs are built from consecutive uniforms (u1, u2):
        r = sqrt(-2 ln(1-u1)), z = (r cos(2 pi u2), r sin(2 pi u2)),
        emitted interleaved and truncated to length n.
        """
        half = (n + 1) // 2
        u = self.uniforms(2 * half)
        u1 = u[0::2]
        u2 = u[1::2]
        rad = np.sqrt(-2.0 * np.log1p(-u1))
        ang = (2.0 * np.pi) * u2
        out = np.empty(2 * half)
        out[0::2] = rad * np.cos(ang)
        out[1::2] = rad * np.sin(ang)
        return out[:n]

    def sphere_directions(self, count, dim):
        """`count` unit vectors in R^dim, rows of the returned array."""
        z = self.normals(count * dim).reshape(count, dim)
        norms = np.sqrt(np.einsum("ij,ij->i", z, z))
        # a zero row has probability ~0; guard keeps the division defined
        norms[norms == 0.0] = 1.0
        return z / norms[:, None]

    def gammas(self, shape, n):
        """`n` Gamma(shape, 1) variates, Marsaglia-Tsang squeeze sampler.

        For shape < 1 the boost identity Gamma(a) = Gamma(a+1) * U^(1/a) is
        applied on top of the shape+1 sampler.  shape == 0 returns zeros (the
        degenerate limit).  Rejection runs in waves: each wave draws one
        normal and one uniform per still-pending slot, in slot order.
        """
        if shape < 0:
            raise ValueError("gamma shape must be nonnegative")
        if n == 0:
            return np.empty(0)
        if shape == 0.0:
            return np.zeros(n)
        boosted = shape < 1.0
        a = shape + 1.0 if boosted else shape
        d = a - 1.0 / 3.0
        c = 1.0 / np.sqrt(9.0 * d)
        out = np.empty(n)
        pending = np.arange(n)
        while pending.size:
            k = pending.size
            x = self.normals(k)
            u = self.uniforms(k)
            v = (1.0 + c * x) ** 3
            ok = v > 0.0
            lhs_sq = u < 1.0 - 0.0331 * x ** 4
            with np.errstate(divide="ignore", invalid="ignore"):
                lhs_ln = np.log(u) < 0.5 * x ** 2 + d * (1.0 - v + np.log(np.where(ok, v, 1.0)))
            accept = ok & (lhs_sq | lhs_ln)
            out[pending[accept]] = d * v[accept]
            pending = pending[~accept]
        if boosted:
            u = self.uniforms(n)
            with np.errstate(under="ignore"):
                out = out * u ** (1.0 / shape)
        return out

    def dirichlet_columns(self, alpha, ncols):
        """Matrix (len(alpha) x ncols) of Dirichlet(alpha) columns.

        Gamma variates are drawn coordinate-major (all of coordinate 0, then
        coordinate 1, ...), each column normalized by its sum.  A column whose
        gamma draws all underflow to zero puts its mass on argmax(alpha).
        """
        alpha = np.asarray(alpha, dtype=float)
        r = alpha.size
        g = np.empty((r, ncols))
        for i in range(r):
            g[i, :] = self.gammas(float(alpha[i]), ncols)
        sums = g.sum(axis=0)
        dead = sums == 0.0
        if dead.any():
            g[:, dead] = 0.0
            g[int(np.argmax(alpha)), dead] = 1.0
            sums = g.sum(axis=0)
        return g / sums


def derive_seed(seed, *labels):
    """Stable u64 sub-seed for (seed, labels); used for per-trial seeding."""
    return _derive(seed, labels)
