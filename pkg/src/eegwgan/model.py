"""Conditional Wasserstein GAN with weight clipping.

The generator multiplies a Gaussian latent vector elementwise by a learned
label embedding and maps it through dense layers of 256, 512 and 1024 units
to a tanh-bounded segment. The critic does the same with the segment itself
(dense layers of 1024, 512 and 256 units) and ends in one linear unit.

Training alternates ``n_critic`` critic updates, each followed by clamping
every critic parameter into ``[-clip_value, clip_value]``, with one generator
update through the frozen critic. Both networks use RMSprop.
"""

import math
from dataclasses import asdict, dataclass, fields
from typing import Callable, NamedTuple, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .data import SEG_LEN, Dataset, sample_real_batch
from .exceptions import ConfigError, EmptyDatasetError, ShapeError, TrainingDivergenceError
from .nn import ConditionedMLP, build_conditioned_mlp, check_labels, clip_parameters, rmsprop_step

__all__ = [
    "GENERATOR_WIDTHS",
    "CRITIC_WIDTHS",
    "GeneratorNet",
    "CriticNet",
    "TrainConfig",
    "LogRecord",
    "TrainingLog",
    "init_networks",
    "sample_latent",
    "generator_forward",
    "critic_forward",
    "critic_loss",
    "wasserstein_estimate",
    "generator_loss",
    "critic_gradients",
    "generator_gradients",
    "train_iteration",
    "train",
    "ConditionalWGAN",
]

GENERATOR_WIDTHS = (256, 512, 1024)
CRITIC_WIDTHS = (1024, 512, 256)


class GeneratorNet(ConditionedMLP):
    """G(z, y): latent batch and labels to segments in [-1, 1]."""

    @classmethod
    def initialize(cls, seg_len=SEG_LEN, latent_dim=100, rng=None, dtype=np.float32):
        rng = np.random.default_rng(rng)
        net = build_conditioned_mlp(latent_dim, GENERATOR_WIDTHS, seg_len, "tanh", rng, dtype)
        return cls(net.embedding, net.hidden, net.out, out_activation="tanh")

    @property
    def latent_dim(self):
        return self.input_dim

    @property
    def seg_len(self):
        return self.output_dim


class CriticNet(ConditionedMLP):
    """D(x, y): segments and labels to one unbounded realness score per row."""

    @classmethod
    def initialize(cls, seg_len=SEG_LEN, rng=None, dtype=np.float32):
        rng = np.random.default_rng(rng)
        net = build_conditioned_mlp(seg_len, CRITIC_WIDTHS, 1, "linear", rng, dtype)
        return cls(net.embedding, net.hidden, net.out, out_activation="linear")

    @property
    def seg_len(self):
        return self.input_dim


@dataclass(frozen=True)
class TrainConfig:
    latent_dim: int = 100
    n_critic: int = 5
    batch: int = 64
    lr: float = 5e-5
    rho: float = 0.9
    eps: float = 1e-8
    clip_c: float = 0.01
    epochs: int = 300
    log_every: int = 100
    seed: int = 0

    def __post_init__(self):
        for name in ("latent_dim", "n_critic", "batch", "epochs", "log_every"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        for name in ("lr", "eps", "clip_c"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0 < self.rho < 1:
            raise ConfigError(f"rho must lie in (0, 1), got {self.rho!r}")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    def to_dict(self):
        return asdict(self)


class LogRecord(NamedTuple):
    epoch: int
    d_loss: float
    g_loss: float


class TrainingLog:
    """Loss records with strictly increasing epoch indices.

    ``d_loss`` is the critic's Wasserstein estimate ``mean(D(real)) -
    mean(D(fake))``; ``g_loss`` is ``-mean(D(fake))``.
    """

    def __init__(self, records=()):
        self.records = []
        for r in records:
            self.append(*r)

    def append(self, epoch, d_loss, g_loss):
        if self.records and epoch <= self.records[-1].epoch:
            raise ValueError(f"epoch {epoch} does not follow {self.records[-1].epoch}")
        self.records.append(LogRecord(int(epoch), float(d_loss), float(g_loss)))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def __eq__(self, other):
        return isinstance(other, TrainingLog) and self.records == other.records

    @property
    def epochs(self):
        return np.array([r.epoch for r in self.records])

    @property
    def d_losses(self):
        return np.array([r.d_loss for r in self.records])

    @property
    def g_losses(self):
        return np.array([r.g_loss for r in self.records])


def init_networks(seg_len=SEG_LEN, latent_dim=100, seed=0):
    """Deterministically initialise a (generator, critic) pair from ``seed``."""
    gen_rng, critic_rng = np.random.default_rng(seed).spawn(2)
    return (
        GeneratorNet.initialize(seg_len, latent_dim, gen_rng),
        CriticNet.initialize(seg_len, critic_rng),
    )


def sample_latent(rng, batch, dim):
    if batch < 1 or dim < 1:
        raise ConfigError(f"latent batch shape must be positive, got ({batch}, {dim})")
    return rng.standard_normal((batch, dim), dtype=np.float32)


def generator_forward(gen, z, y, record=False):
    return gen.forward(z, y, record=record)


def critic_forward(critic, x, y, record=False):
    return critic.forward(x, y, record=record)[:, 0]


def _mean(v):
    v = np.asarray(v)
    if v.size == 0:
        raise ValueError("scores must be non-empty")
    return float(np.mean(v, dtype=np.float64))


def wasserstein_estimate(real_scores, fake_scores):
    """``mean(real) - mean(fake)``, the quantity the critic maximises."""
    return _mean(real_scores) - _mean(fake_scores)


def critic_loss(real_scores, fake_scores):
    """Critic objective in minimisation form: ``-(mean(real) - mean(fake))``."""
    return -wasserstein_estimate(real_scores, fake_scores)


def generator_loss(fake_scores):
    return -_mean(fake_scores)


def _check_finite(value, what, iteration):
    if not math.isfinite(value):
        raise TrainingDivergenceError(f"{what} became {value} at iteration {iteration}", iteration)


def critic_gradients(critic, real, fake, labels):
    """Accumulate gradients of the critic loss into the critic's parameters.

    Real and fake rows share ``labels``. Returns the Wasserstein estimate
    ``mean(D(real)) - mean(D(fake))``.
    """
    n_real, n_fake = real.shape[0], fake.shape[0]
    scores = critic_forward(
        critic, np.concatenate([real, fake]), np.concatenate([labels, labels]), record=True
    )
    # d(-(mean real - mean fake)) / d score
    upstream = np.empty((n_real + n_fake, 1), dtype=critic.dtype)
    upstream[:n_real] = -1.0 / n_real
    upstream[n_real:] = 1.0 / n_fake
    critic.backward(upstream)
    return wasserstein_estimate(scores[:n_real], scores[n_real:])


def generator_gradients(gen, critic, z, labels):
    """Accumulate gradients of the generator loss into the generator only.

    The critic is treated as frozen: its parameter gradients are untouched.
    Returns the generator loss.
    """
    fake = generator_forward(gen, z, labels, record=True)
    scores = critic_forward(critic, fake, labels, record=True)
    upstream = np.full((scores.shape[0], 1), -1.0 / scores.shape[0], dtype=critic.dtype)
    grad_fake = critic.backward(upstream, param_grads=False)
    gen.backward(grad_fake)
    return generator_loss(scores)


def _critic_step(gen, critic, ds, cfg, rng):
    real, labels = sample_real_batch(ds, cfg.batch, rng)
    z = sample_latent(rng, cfg.batch, gen.latent_dim)
    fake = generator_forward(gen, z, labels)
    d_loss = critic_gradients(critic, real, fake, labels)
    for p in critic.parameters():
        rmsprop_step(p, cfg.lr, cfg.rho, cfg.eps)
    clip_parameters(critic.parameters(), cfg.clip_c)
    return d_loss


def _generator_step(gen, critic, cfg, rng):
    z = sample_latent(rng, cfg.batch, gen.latent_dim)
    labels = rng.integers(0, 2, size=cfg.batch)
    g_loss = generator_gradients(gen, critic, z, labels)
    for p in gen.parameters():
        rmsprop_step(p, cfg.lr, cfg.rho, cfg.eps)
    return g_loss


def train_iteration(gen, critic, ds, cfg, rng, iteration=0, on_critic_update=None):
    """``n_critic`` clipped critic updates followed by one generator update.

    Returns ``(d_loss, g_loss)``: the Wasserstein estimate of the last critic
    update and the generator loss.
    """
    d_loss = float("nan")
    for _ in range(cfg.n_critic):
        try:
            d_loss = _critic_step(gen, critic, ds, cfg, rng)
        except TrainingDivergenceError as exc:
            raise TrainingDivergenceError(f"{exc} (iteration {iteration})", iteration) from None
        _check_finite(d_loss, "critic loss", iteration)
        if on_critic_update is not None:
            on_critic_update(critic)
    try:
        g_loss = _generator_step(gen, critic, cfg, rng)
    except TrainingDivergenceError as exc:
        raise TrainingDivergenceError(f"{exc} (iteration {iteration})", iteration) from None
    _check_finite(g_loss, "generator loss", iteration)
    return d_loss, g_loss


def iterations_per_epoch(n_samples, batch):
    return math.ceil(n_samples / batch)


def train(
    ds: Dataset,
    cfg: TrainConfig = TrainConfig(),
    on_critic_update: Optional[Callable[[CriticNet], None]] = None,
    verbose: bool = False,
):
    """Train a generator and critic on ``ds``.

    One epoch is ``ceil(len(ds) / cfg.batch)`` iterations. Every
    ``cfg.log_every`` epochs, and after the final epoch, the epoch's mean
    critic and generator losses are appended to the returned log.
    """
    if len(ds) == 0:
        raise EmptyDatasetError("cannot train on an empty dataset")
    counts = ds.class_counts()
    if min(counts.values()) == 0:
        raise ConfigError(f"training needs samples of both labels, got counts {counts}")
    gen, critic = init_networks(ds.seg_len, cfg.latent_dim, cfg.seed)
    rng = np.random.default_rng([cfg.seed, 1])
    log = TrainingLog()
    n_iter = iterations_per_epoch(len(ds), cfg.batch)
    iteration = 0
    for epoch in range(1, cfg.epochs + 1):
        d_sum = g_sum = 0.0
        for _ in range(n_iter):
            d, g = train_iteration(gen, critic, ds, cfg, rng, iteration, on_critic_update)
            d_sum += d
            g_sum += g
            iteration += 1
        if epoch % cfg.log_every == 0 or epoch == cfg.epochs:
            log.append(epoch, d_sum / n_iter, g_sum / n_iter)
            if verbose:
                r = log[-1]
                print(f"epoch {r.epoch:4d}  d_loss {r.d_loss:+.6f}  g_loss {r.g_loss:+.6f}")
    return gen, critic, log


class ConditionalWGAN(BaseEstimator):
    """Estimator wrapper around :func:`train`.

    ``fit(X, y)`` expects ``X`` already scaled into [-1, 1] with one segment
    per row and binary labels ``y``. After fitting, :meth:`sample` draws
    synthetic segments for a label and :meth:`decision_function` returns
    critic scores.

    Parameters
    ----------
    latent_dim : int, default=100
    n_critic : int, default=5
        Critic updates per generator update.
    batch_size : int, default=64
    learning_rate : float, default=5e-5
        RMSprop step size for both networks.
    rho, eps : float
        RMSprop decay and denominator offset.
    clip_value : float, default=0.01
        Critic parameters are clamped to ``[-clip_value, clip_value]``.
    epochs : int, default=300
    log_every : int, default=100
    random_state : int, default=0
    """

    def __init__(
        self,
        latent_dim=100,
        n_critic=5,
        batch_size=64,
        learning_rate=5e-5,
        rho=0.9,
        eps=1e-8,
        clip_value=0.01,
        epochs=300,
        log_every=100,
        random_state=0,
        verbose=False,
    ):
        self.latent_dim = latent_dim
        self.n_critic = n_critic
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.rho = rho
        self.eps = eps
        self.clip_value = clip_value
        self.epochs = epochs
        self.log_every = log_every
        self.random_state = random_state
        self.verbose = verbose

    def _config(self):
        return TrainConfig(
            latent_dim=self.latent_dim,
            n_critic=self.n_critic,
            batch=self.batch_size,
            lr=self.learning_rate,
            rho=self.rho,
            eps=self.eps,
            clip_c=self.clip_value,
            epochs=self.epochs,
            log_every=self.log_every,
            seed=self.random_state,
        )

    def fit(self, X, y):
        X = check_array(X, dtype=np.float32)
        y = check_labels(y, n=X.shape[0])
        ds = Dataset(X, y, seg_len=X.shape[1])
        self.generator_, self.critic_, self.training_log_ = train(
            ds, self._config(), verbose=self.verbose
        )
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        return self

    def sample(self, n_samples, label, random_state=None):
        """Draw ``n_samples`` synthetic segments conditioned on ``label``."""
        from .evaluation import SynthesisRequest, generate_synthetic

        check_is_fitted(self, "generator_")
        seed = self.random_state if random_state is None else random_state
        return generate_synthetic(self.generator_, SynthesisRequest(label, n_samples, seed))

    def decision_function(self, X, y):
        """Critic scores for segments ``X`` paired with labels ``y``."""
        check_is_fitted(self, "critic_")
        X = check_array(X, dtype=np.float32)
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return critic_forward(self.critic_, X, y)
