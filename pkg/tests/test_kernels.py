"""Both kernel flavors against scalar-loop oracles and against each other."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from gadl import kernels

from conftest import loss_oracle, rand_ae


def _flavors():
    out = [("numpy", kernels.encode_batch_numpy, kernels.forward_batch_numpy,
            kernels.sum_squared_error_numpy, kernels.gradient_batch_numpy)]
    if kernels.HAVE_NUMBA:
        out.append(("numba", kernels.encode_batch_numba, kernels.forward_batch_numba,
                    kernels.sum_squared_error_numba, kernels.gradient_batch_numba))
    return out


def _case(seed, n=5, hidden=4, visible=7):
    ae = rand_ae(seed, hidden, visible)
    from gadl.numerics import RandomStream
    x = RandomStream(seed).fork("x").uniform(0.0, 1.0, (n, visible))
    return ae, np.ascontiguousarray(x)


def _sig(z):
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    return math.exp(z) / (1.0 + math.exp(z))


def _forward_loops(ae, x):
    n, v = x.shape
    h = np.empty((n, ae.hidden))
    xhat = np.empty((n, v))
    for s in range(n):
        for i in range(ae.hidden):
            h[s, i] = _sig(sum(ae.weights[i, j] * x[s, j] for j in range(v))
                           + ae.enc_bias[i])
        for j in range(v):
            xhat[s, j] = _sig(sum(ae.weights[i, j] * h[s, i] for i in range(ae.hidden))
                              + ae.dec_bias[j])
    return h, xhat


@pytest.mark.parametrize("name,enc,fwd,sse,grad", _flavors())
def test_forward_matches_loop_oracle(name, enc, fwd, sse, grad):
    ae, x = _case(21)
    h_ref, xhat_ref = _forward_loops(ae, x)
    h, xhat = fwd(ae.weights, ae.enc_bias, ae.dec_bias, x)
    np.testing.assert_allclose(h, h_ref, rtol=1e-12)
    np.testing.assert_allclose(xhat, xhat_ref, rtol=1e-12)
    np.testing.assert_allclose(enc(ae.weights, ae.enc_bias, x), h_ref, rtol=1e-12)


@pytest.mark.parametrize("name,enc,fwd,sse,grad", _flavors())
def test_sse_matches_loop_oracle(name, enc, fwd, sse, grad):
    ae, x = _case(22)
    _, xhat_ref = _forward_loops(ae, x)
    ref = float(((xhat_ref - x) ** 2).sum())
    got = sse(ae.weights, ae.enc_bias, ae.dec_bias, x)
    assert abs(got - ref) < 1e-12 * max(1.0, ref)
    # sse/(n*d) must agree with the independent loss oracle too
    loss = loss_oracle(ae.weights.tolist(), ae.enc_bias.tolist(),
                       ae.dec_bias.tolist(), x.tolist())
    assert abs(got / x.size - loss) < 1e-12


def test_flavors_agree():
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    for seed in (31, 32, 33):
        ae, x = _case(seed, n=9, hidden=6, visible=11)
        args = (ae.weights, ae.enc_bias, ae.dec_bias, x)
        h_np, r_np = kernels.forward_batch_numpy(*args)
        h_nb, r_nb = kernels.forward_batch_numba(*args)
        np.testing.assert_allclose(h_np, h_nb, rtol=1e-12)
        np.testing.assert_allclose(r_np, r_nb, rtol=1e-12)
        assert abs(kernels.sum_squared_error_numpy(*args)
                   - kernels.sum_squared_error_numba(*args)) < 1e-10
        for a, b in zip(kernels.gradient_batch_numpy(*args),
                        kernels.gradient_batch_numba(*args)):
            np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-14)


def test_dispatch_matches_backend():
    if kernels.BACKEND == "numba":
        assert kernels.gradient_batch is kernels.gradient_batch_numba
    else:
        assert kernels.gradient_batch is kernels.gradient_batch_numpy


def test_backend_deterministic_within_process():
    ae, x = _case(40, n=8, hidden=5, visible=9)
    args = (ae.weights, ae.enc_bias, ae.dec_bias, x)
    first = kernels.gradient_batch(*args)
    second = kernels.gradient_batch(*args)
    for a, b in zip(first, second):
        assert np.array_equal(a, b)


def _import_backend(env_value):
    env = dict(os.environ)
    if env_value is None:
        env.pop("GADL_BACKEND", None)
    else:
        env["GADL_BACKEND"] = env_value
    proc = subprocess.run(
        [sys.executable, "-c", "import gadl.kernels as k; print(k.BACKEND)"],
        capture_output=True, text=True, env=env,
    )
    return proc


def test_env_flag_selects_numpy():
    proc = _import_backend("numpy")
    assert proc.returncode == 0
    assert proc.stdout.strip() == "numpy"


def test_env_flag_selects_numba():
    if not kernels.HAVE_NUMBA:
        pytest.skip("numba unavailable")
    proc = _import_backend("numba")
    assert proc.returncode == 0
    assert proc.stdout.strip() == "numba"


def test_env_flag_rejects_unknown():
    proc = _import_backend("cuda")
    assert proc.returncode != 0
    assert "GADL_BACKEND" in proc.stderr


def test_warmup_runs():
    kernels.warmup()
