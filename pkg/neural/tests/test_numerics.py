import torch

from bincall_neural.model import adj_normalized, attend_step, attention_pool, gcn_layer


def relative_error(analytic, numeric):
    denom = max(float(analytic.abs().max()), float(numeric.abs().max()), 1e-12)
    return float((analytic - numeric).abs().max()) / denom


def finite_difference(fn, param, eps=1e-6):
    grad = torch.zeros_like(param)
    flat = param.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.numel()):
        original = float(flat[i])
        flat[i] = original + eps
        plus = float(fn())
        flat[i] = original - eps
        minus = float(fn())
        flat[i] = original
        gflat[i] = (plus - minus) / (2 * eps)
    return grad


def test_gcn_layer_gradients():
    torch.manual_seed(0)
    h = torch.randn(4, 3, dtype=torch.double)
    w_self = torch.randn(3, 3, dtype=torch.double, requires_grad=True)
    w_neighbor = torch.randn(3, 3, dtype=torch.double, requires_grad=True)
    adj = adj_normalized(4, [(0, 1), (1, 2), (2, 3)]).double()
    probe = torch.randn(4, 3, dtype=torch.double)

    def loss():
        return (gcn_layer(h, adj, w_self, w_neighbor) * probe).sum()

    for param in (w_self, w_neighbor):
        value = loss()
        analytic = torch.autograd.grad(value, param, retain_graph=False)[0]
        with torch.no_grad():
            numeric = finite_difference(loss, param)
        assert relative_error(analytic, numeric) < 1e-4


def test_gcn_layer_gradcheck():
    torch.manual_seed(1)
    h = torch.randn(3, 2, dtype=torch.double, requires_grad=True)
    w_self = torch.randn(2, 2, dtype=torch.double, requires_grad=True)
    w_neighbor = torch.randn(2, 2, dtype=torch.double, requires_grad=True)
    adj = adj_normalized(3, [(0, 1), (1, 2)]).double()
    assert torch.autograd.gradcheck(
        lambda a, b, c: gcn_layer(a, adj, b, c), (h, w_self, w_neighbor), eps=1e-6, atol=1e-5
    )


def test_attend_step_gradients():
    torch.manual_seed(2)
    latents = torch.randn(5, 4, dtype=torch.double)
    h = torch.randn(6, dtype=torch.double)
    w_a = torch.randn(4, 6, dtype=torch.double, requires_grad=True)
    probe = torch.randn(4, dtype=torch.double)

    def loss():
        ctx, _ = attend_step(latents, h, w_a)
        return (ctx * probe).sum()

    value = loss()
    analytic = torch.autograd.grad(value, w_a)[0]
    with torch.no_grad():
        numeric = finite_difference(loss, w_a)
    assert relative_error(analytic, numeric) < 1e-4


def test_attend_step_gradcheck():
    torch.manual_seed(3)
    latents = torch.randn(4, 3, dtype=torch.double, requires_grad=True)
    h = torch.randn(5, dtype=torch.double, requires_grad=True)
    w_a = torch.randn(3, 5, dtype=torch.double, requires_grad=True)
    assert torch.autograd.gradcheck(
        lambda z, s, w: attend_step(z, s, w)[0], (latents, h, w_a), eps=1e-6, atol=1e-5
    )


def test_softmax_invariants_on_random_inputs():
    torch.manual_seed(4)
    for _ in range(25):
        n, dz, dh = (
            int(torch.randint(1, 8, ())),
            int(torch.randint(1, 6, ())),
            int(torch.randint(1, 6, ())),
        )
        latents = torch.randn(n, dz) * 10
        h = torch.randn(dh) * 10
        w_a = torch.randn(dz, dh)
        _, alpha = attend_step(latents, h, w_a)
        assert torch.all(alpha >= 0)
        assert abs(float(alpha.sum()) - 1.0) < 1e-6

        states = torch.randn(n, dh) * 10
        _, pool_alpha = attention_pool(states, torch.randn(dh))
        assert torch.all(pool_alpha >= 0)
        assert abs(float(pool_alpha.sum()) - 1.0) < 1e-6
