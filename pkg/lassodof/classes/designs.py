# built-in imports
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Union

# third-party imports
import numpy as np
from scipy import fft, linalg

# custom imports
from ..utils import DESIGN_KIND, InvalidSpec, DimensionMismatch
from ..utils.constants import BLUR_WIDTH, NOISE_SIGMA

Seed = Union[int, np.random.SeedSequence]


def make_generator(seed: Seed) -> np.random.Generator:
    """
    counter-based Philox generator, seeded from an integer or a spawned SeedSequence
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def spawn_streams(seed: Seed, count: int) -> list:
    """
    split one seed into `count` independent streams, stream k only depends on (seed, k)
    """
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    return root.spawn(count)


@dataclass(frozen=True)
class DesignSpec:
    """
    description of a design matrix A

    kind-specific fields: blur_width for convolution, seed for gaussian entries and for the
    partial_fourier row subset, entries for explicit.

    ex: spec = DesignSpec(DESIGN_KIND.GAUSSIAN, n=256, p=1024, seed=3)
    """
    kind: DESIGN_KIND
    n: int
    p: int
    seed: int = 0
    blur_width: float = BLUR_WIDTH
    entries: Optional[tuple] = field(default=None, compare=False)

    def validate(self):
        if self.n < 1 or self.p < 1:
            raise InvalidSpec(f'design needs n >= 1 and p >= 1, got n={self.n}, p={self.p}')
        if self.kind == DESIGN_KIND.CONVOLUTION and self.n != self.p:
            raise InvalidSpec(f'convolution design needs n = p, got n={self.n}, p={self.p}')
        if self.kind == DESIGN_KIND.PARTIAL_FOURIER and self.n > self.p:
            raise InvalidSpec(f'partial_fourier design needs n <= p, got n={self.n}, p={self.p}')
        if self.kind == DESIGN_KIND.CONVOLUTION and self.blur_width < 0:
            raise InvalidSpec('blur_width must be nonnegative')
        if self.kind == DESIGN_KIND.EXPLICIT:
            if self.entries is None:
                raise InvalidSpec('explicit design needs entries')
            shape = np.shape(self.entries)
            if shape != (self.n, self.p):
                raise InvalidSpec(f'explicit entries have shape {shape}, expected ({self.n}, {self.p})')

    def with_size(self, n: int, p: int) -> 'DesignSpec':
        return DesignSpec(self.kind, n, p, self.seed, self.blur_width, self.entries)

    def to_dict(self) -> dict:
        document = dict(kind=self.kind.value, n=self.n, p=self.p, seed=self.seed)
        if self.kind == DESIGN_KIND.CONVOLUTION:
            document['blur_width'] = self.blur_width
        if self.kind == DESIGN_KIND.EXPLICIT:
            document['entries'] = [list(row) for row in self.entries]
        return document

    @classmethod
    def from_dict(cls, document: dict) -> 'DesignSpec':
        try:
            kind = DESIGN_KIND(document['kind'])
        except (KeyError, ValueError) as error:
            raise InvalidSpec(f'unknown design kind: {document.get("kind")}') from error
        entries = document.get('entries')
        if entries is not None:
            entries = tuple(tuple(float(value) for value in row) for row in entries)
        return cls(kind=kind, n=int(document['n']), p=int(document['p']),
                   seed=int(document.get('seed', 0)),
                   blur_width=float(document.get('blur_width', BLUR_WIDTH)),
                   entries=entries)


@dataclass(frozen=True)
class SignalSpec:
    """
    k-sparse ground truth of length p, standard normal amplitudes at uniformly drawn positions
    """
    p: int
    sparsity: int

    def validate(self):
        if self.p < 1:
            raise InvalidSpec(f'signal length must be positive, got {self.p}')
        if not 0 <= self.sparsity <= self.p:
            raise InvalidSpec(f'sparsity must lie in [0, {self.p}], got {self.sparsity}')

    @classmethod
    def from_fraction(cls, p: int, fraction: float) -> 'SignalSpec':
        # ceil(fraction * p) nonzero entries
        return cls(p=p, sparsity=int(math.ceil(fraction * p - 1e-12)))


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = NOISE_SIGMA
    seed: Seed = 0

    def validate(self):
        if not self.sigma > 0:
            raise InvalidSpec(f'noise level must be positive, got {self.sigma}')


class Design(ABC):
    # Abstract class for design matrix generators

    def __init__(self, spec: DesignSpec):
        self.spec = spec

    @abstractmethod
    def build(self) -> np.ndarray:
        pass


class GaussianDesign(Design):
    """
    entries iid N(0, 1/n), columns have unit norm on average
    """

    def build(self) -> np.ndarray:
        rng = make_generator(self.spec.seed)
        return rng.normal(0.0, 1.0 / math.sqrt(self.spec.n), size=(self.spec.n, self.spec.p))


class ConvolutionDesign(Design):
    """
    circulant matrix of a discrete Gaussian blur with circular boundary

    the kernel has standard deviation blur_width samples and unit l2 norm, blur_width = 0 is the
    delta kernel and gives the identity
    """

    def kernel(self) -> np.ndarray:
        p = self.spec.p
        if self.spec.blur_width == 0:
            kernel = np.zeros(p)
            kernel[0] = 1.0
            return kernel
        offsets = np.arange(p)
        distance = np.minimum(offsets, p - offsets)
        kernel = np.exp(-0.5 * (distance / self.spec.blur_width) ** 2)
        return kernel / np.linalg.norm(kernel)

    def build(self) -> np.ndarray:
        return linalg.circulant(self.kernel())


class PartialFourierDesign(Design):
    """
    n rows drawn without replacement from the orthonormal p x p DCT-II matrix

    the rows are kept in increasing order so A A^T = I_n
    """

    def build(self) -> np.ndarray:
        dct_matrix = fft.dct(np.eye(self.spec.p), type=2, norm='ortho', axis=0)
        rng = make_generator(self.spec.seed)
        rows = np.sort(rng.choice(self.spec.p, size=self.spec.n, replace=False))
        return dct_matrix[rows]


class ExplicitDesign(Design):

    def build(self) -> np.ndarray:
        matrix = np.array(self.spec.entries, dtype=float)
        if not np.all(np.isfinite(matrix)):
            raise InvalidSpec('explicit design has non finite entries')
        return matrix


# Dictionary mapping design kinds to the generator classes
design_mapping = {
    DESIGN_KIND.GAUSSIAN: GaussianDesign,
    DESIGN_KIND.CONVOLUTION: ConvolutionDesign,
    DESIGN_KIND.PARTIAL_FOURIER: PartialFourierDesign,
    DESIGN_KIND.EXPLICIT: ExplicitDesign,
}


def make_design(spec: DesignSpec) -> np.ndarray:
    spec.validate()
    return design_mapping[spec.kind](spec).build()


def make_signal(spec: SignalSpec, seed: Seed) -> np.ndarray:
    """
    x0 with exactly spec.sparsity nonzero entries

    Parameters:
    - spec (SignalSpec): length and sparsity.
    - seed (int or SeedSequence): stream for positions and amplitudes.

    Returns:
    - np.ndarray: the sparse signal.
    """
    spec.validate()
    rng = make_generator(seed)
    signal = np.zeros(spec.p)
    positions = rng.choice(spec.p, size=spec.sparsity, replace=False)
    values = rng.standard_normal(spec.sparsity)
    # a standard normal draw is zero with probability 0, guard anyway
    values[values == 0.0] = 1.0
    signal[positions] = values
    return signal


def observe(A, x0, noise: NoiseSpec) -> np.ndarray:
    """
    y = A x0 + eps with eps iid N(0, sigma^2), deterministic for a fixed noise seed
    """
    noise.validate()
    A = np.asarray(A, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if A.ndim != 2 or x0.ndim != 1 or A.shape[1] != x0.shape[0]:
        raise DimensionMismatch(f'design has shape {A.shape} but signal has length {x0.shape[0]}')
    rng = make_generator(noise.seed)
    return A @ x0 + noise.sigma * rng.standard_normal(A.shape[0])
