"""Analytic-vs-numeric gradient comparison for the generator and critic composites."""

import numpy as np

from eegwgan.model import critic_gradients, generator_gradients, generator_forward, init_networks

from oracles import critic_objective, finite_difference_check, generator_objective, net_arrays


def composite_check(seed, batch=8, seg_len=32, latent_dim=100, per_tensor=8):
    """Return {'critic': (err, probes, skipped), 'generator': (...)} for one seed."""
    gen, critic = init_networks(seg_len, latent_dim, seed)
    gen, critic = gen.astype(np.float64), critic.astype(np.float64)
    rng = np.random.default_rng([seed, 7])
    real = rng.uniform(-1, 1, size=(batch, seg_len))
    z = rng.standard_normal((batch, latent_dim))
    labels = rng.integers(0, 2, size=batch)
    fake = generator_forward(gen, z, labels)

    critic_gradients(critic, real, fake, labels)
    generator_gradients(gen, critic, z, labels)
    c_grad = {n: p.grad.copy() for n, p in critic.named_parameters()}
    g_grad = {n: p.grad.copy() for n, p in gen.named_parameters()}

    c_arr = net_arrays(critic)
    g_arr = net_arrays(gen)
    out = {}
    out["critic"] = finite_difference_check(
        c_arr, c_grad, lambda a: critic_objective(a, real, fake, labels), rng, per_tensor
    )
    out["generator"] = finite_difference_check(
        g_arr, g_grad, lambda a: generator_objective(a, c_arr, z, labels), rng, per_tensor
    )
    return out
