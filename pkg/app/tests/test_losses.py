import numpy as np
import pytest

from app.learning.losses import get_loss, loss1, loss2, loss3
from app.schemas.base import TripletMargins
from app.tests.helpers import numerical_gradient, relative_error
from app.utils.constants import LossType
from app.utils.exceptions import NumericError

FA = np.array([0.0, 0.0])
FP = np.array([2.0, 0.0])
FN = np.array([1.0, 0.0])

# beta=0.4 with alpha=0.5 keeps beta < alpha
HAND = TripletMargins(alpha=0.5, beta=0.4)


def test_loss1_inactive_hinge():
    fa = np.array([1.0, 1.0])
    fn = fa + np.array([np.sqrt(10.0), 0.0])
    out = loss1(fa, fa.copy(), fn, HAND)
    assert out.value == 0.0
    assert not out.grad_anchor.any() and not out.grad_positive.any() and not out.grad_negative.any()


def test_loss1_hand_value():
    out = loss1(FA, FP, FN, HAND)
    assert out.value == pytest.approx(3.5)
    assert out.grad_positive == pytest.approx([4.0, 0.0])


def test_loss2_hand_value():
    assert loss2(FA, FP, FN, HAND).value == pytest.approx(7.1)


def test_loss2_reduces_to_loss1_when_anchor_equals_positive():
    fn = np.array([0.3, 0.1])
    assert loss2(FA, FA.copy(), fn, HAND).value == pytest.approx(loss1(FA, FA.copy(), fn, HAND).value)


def test_loss2_positive_term_inactive_at_kink():
    fp = np.array([np.sqrt(0.25), 0.0])
    margins = TripletMargins(alpha=0.5, beta=0.25)
    fn = np.array([5.0, 0.0])
    out = loss2(FA, fp, fn, margins)
    assert out.value == pytest.approx(0.0)
    assert not out.grad_positive.any()


def test_loss3_hand_values():
    assert loss3(FA, FP, FN, HAND).value == pytest.approx(3.6)
    zero = np.zeros(2)
    assert loss3(zero, zero, zero, TripletMargins(alpha=0.8, beta=0.4)).value == pytest.approx(0.8)


def test_loss3_both_hinges_inactive(margins):
    fa = np.zeros(2)
    out = loss3(fa, np.array([0.5, 0.0]), np.array([1.0, 0.0]), margins)
    assert out.value == 0.0


def test_losses_reject_non_finite(margins):
    with pytest.raises(NumericError):
        loss1(FA, np.array([np.inf, 0.0]), FN, margins)


def test_batch_is_averaged(margins, rng):
    a, p, n = (rng.normal(size=(8, 3)) for _ in range(3))
    batch = loss2(a, p, n, margins)
    singles = [loss2(a[i], p[i], n[i], margins) for i in range(8)]
    assert batch.value == pytest.approx(np.mean([s.value for s in singles]))
    assert batch.grad_anchor[3] == pytest.approx(singles[3].grad_anchor / 8)


def test_properties_on_random_triplets(margins, rng):
    for _ in range(200):
        a, p, n = (rng.normal(size=4) for _ in range(3))
        shift = rng.normal(size=4)
        values = [fn(a, p, n, margins).value for fn in (loss1, loss2, loss3)]
        assert min(values) >= 0.0
        assert values[1] >= values[0]
        for fn, value in zip((loss1, loss2, loss3), values):
            assert fn(a + shift, p + shift, n + shift, margins).value == pytest.approx(value, abs=1e-9)


def test_loss3_positive_gradient_ignores_negative(margins, rng):
    a, p, n = (rng.normal(size=4) for _ in range(3))
    first = loss3(a, p, n, margins).grad_positive
    second = loss3(a, p, n + rng.normal(size=4), margins).grad_positive
    assert np.array_equal(first, second)


def _near_kink(a, p, n, margins, tolerance=1e-3):
    d_pos = np.sum((a - p) ** 2)
    d_neg = np.sum((a - n) ** 2)
    terms = [d_pos - d_neg + margins.alpha, d_pos - margins.beta, margins.alpha - d_neg]
    return min(abs(t) for t in terms) < tolerance


@pytest.mark.parametrize("loss", list(LossType))
def test_gradients_match_finite_differences(loss, margins, rng):
    fn = get_loss(loss)
    checked = 0
    while checked < 100:
        a, p, n = (0.6 * rng.normal(size=3) for _ in range(3))
        if _near_kink(a, p, n, margins):
            continue
        out = fn(a, p, n, margins)
        for analytic, vector in zip((out.grad_anchor, out.grad_positive, out.grad_negative), (a, p, n)):
            numeric = numerical_gradient(lambda: fn(a, p, n, margins).value, vector)
            if np.linalg.norm(analytic) + np.linalg.norm(numeric) > 0:
                assert relative_error(analytic, numeric) < 1e-4
        checked += 1
