"""Oscillator dynamics: builtin parameters, step rules, sweeps."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cotn.oscillator import (
    BifurcationData,
    LeeParams,
    LorsParams,
    OscState,
    ZERO_STATE,
    bifurcation_sweep,
    builtin_params,
    builtin_type_ids,
    lee_step,
    lors_step,
    simulate,
    stimulus_signal,
    write_bifurcation_csv,
)

# All 13 fields for each builtin type, written out once more by hand so a
# typo in the library table cannot hide.
EXPECTED_BUILTINS = {
    1: dict(a1=0.0, a2=5.0, a3=5.0, a4=1.0, b1=0.0, b2=-1.0, b3=1.0, b4=0.0,
            mu=5.0, k=500.0, xi_e=0.0, xi_i=0.0, e=0.001),
    2: dict(a1=0.5, a2=0.55, a3=0.55, a4=-0.5, b1=0.5, b2=-0.55, b3=-0.55,
            b4=-0.5, mu=1.0, k=50.0, xi_e=0.0, xi_i=0.0, e=0.001),
    3: dict(a1=0.5, a2=0.6, a3=0.55, a4=0.5, b1=-0.5, b2=-0.6, b3=-0.55,
            b4=0.5, mu=1.0, k=50.0, xi_e=0.0, xi_i=0.0, e=0.001),
    4: dict(a1=-0.5, a2=0.55, a3=0.55, a4=-0.5, b1=-0.5, b2=-0.55, b3=-0.55,
            b4=0.5, mu=1.0, k=50.0, xi_e=0.0, xi_i=0.0, e=0.001),
    5: dict(a1=-0.9, a2=0.9, a3=0.9, a4=-0.9, b1=0.9, b2=-0.9, b3=-0.9,
            b4=0.9, mu=1.0, k=50.0, xi_e=0.0, xi_i=0.0, e=0.001),
    6: dict(a1=-0.9, a2=0.9, a3=0.9, a4=-0.9, b1=0.9, b2=-0.9, b3=-0.9,
            b4=0.9, mu=1.0, k=300.0, xi_e=0.0, xi_i=0.0, e=0.001),
    7: dict(a1=-5.0, a2=5.0, a3=5.0, a4=-5.0, b1=1.0, b2=-1.0, b3=-1.0,
            b4=1.0, mu=1.0, k=50.0, xi_e=0.0, xi_i=0.0, e=0.001),
    8: dict(a1=-5.0, a2=5.0, a3=5.0, a4=-5.0, b1=1.0, b2=-1.0, b3=-1.0,
            b4=1.0, mu=1.0, k=300.0, xi_e=0.0, xi_i=0.0, e=0.001),
}


def ref_lors_trajectory(x, p, n_steps):
    """Straight-line reference recurrence, written independently."""
    if x > 0:
        s = x + p.e
    elif x < 0:
        s = x - p.e
    else:
        s = 0.0
    e = i = out = 0.0
    vals = []
    for _ in range(n_steps):
        e_n = math.tanh(p.mu * (p.a1 * out + p.a2 * e - p.a3 * i + p.a4 * s - p.xi_e))
        i_n = math.tanh(p.mu * (p.b1 * out - p.b2 * e - p.b3 * i + p.b4 * s - p.xi_i))
        om_n = math.tanh(p.mu * s)
        out = (e_n - i_n) * math.exp(-p.k * s * s) + om_n
        e, i = e_n, i_n
        vals.append(out)
    return np.array(vals)


class TestBuiltins:
    def test_type_ids(self):
        assert builtin_type_ids() == (1, 2, 3, 4, 5, 6, 7, 8)

    @pytest.mark.parametrize("type_id", sorted(EXPECTED_BUILTINS))
    def test_all_fields_exact(self, type_id):
        p = builtin_params(type_id)
        for name, want in EXPECTED_BUILTINS[type_id].items():
            assert getattr(p, name) == want, f"type {type_id} field {name}"

    def test_unknown_type_rejected(self):
        for bad in (0, 9, -1, "1"):
            with pytest.raises(ValueError):
                builtin_params(bad)


class TestParamValidation:
    def test_mu_must_be_positive(self):
        with pytest.raises(ValueError):
            LorsParams(0, 1, 1, 1, 0, 1, 1, 0, mu=0.0, k=50.0)

    def test_k_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            LorsParams(0, 1, 1, 1, 0, 1, 1, 0, mu=1.0, k=-1.0)
        with pytest.raises(ValueError):
            LeeParams(1, 1, 1, 1, k=-0.5)

    def test_e_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            LorsParams(0, 1, 1, 1, 0, 1, 1, 0, mu=1.0, k=50.0, e=-0.001)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            LorsParams(math.nan, 1, 1, 1, 0, 1, 1, 0, mu=1.0, k=50.0)
        with pytest.raises(ValueError):
            LeeParams(math.inf, 1, 1, 1)
        with pytest.raises(ValueError):
            OscState(e=math.nan)


class TestStimulusSignal:
    def test_sign_shaping(self):
        assert stimulus_signal(0.3, 0.001) == 0.3 + 0.001
        assert stimulus_signal(-0.3, 0.001) == -0.3 - 0.001

    def test_zero_input_stays_zero(self):
        assert stimulus_signal(0.0, 0.001) == 0.0

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            stimulus_signal(math.nan, 0.001)


class TestLorsStep:
    def test_first_step_type1_oracle(self):
        # From rest at raw input 1 (S = 1.001): E' = tanh(5 * 1.001),
        # I' = 0, Omega' = tanh(5 * 1.001); the Gaussian factor is ~5e-218
        # so L' equals Omega' after rounding.
        st1 = lors_step(ZERO_STATE, 1.0, builtin_params(1))
        assert st1.e == pytest.approx(0.9999101076546714, abs=0)
        assert st1.i == 0.0
        assert st1.omega == st1.e
        assert st1.out == pytest.approx(0.9999101076546714, abs=0)

    def test_zero_input_fixed_point(self):
        state = ZERO_STATE
        for _ in range(5):
            state = lors_step(state, 0.0, builtin_params(3))
        assert state == OscState(0.0, 0.0, 0.0, 0.0)

    def test_matches_reference_all_types(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            type_id = int(rng.integers(1, 9))
            x = float(rng.uniform(-2.0, 2.0))
            n = int(rng.integers(1, 12))
            p = builtin_params(type_id)
            ref = ref_lors_trajectory(x, p, n)
            got = simulate(x, p, n).values
            np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)

    def test_step_and_simulate_bit_identical(self):
        p = builtin_params(5)
        state = ZERO_STATE
        stepped = []
        for _ in range(40):
            state = lors_step(state, 0.37, p)
            stepped.append(state.out)
        traj = simulate(0.37, p, 40)
        assert np.array_equal(np.array(stepped), traj.values)

    def test_retrograde_feedback_enters_update(self):
        # a1/b1 couple the previous output back in: zeroing them must
        # change the second step whenever the first output is nonzero.
        p = builtin_params(2)
        p0 = LorsParams(0.0, p.a2, p.a3, p.a4, 0.0, p.b2, p.b3, p.b4,
                        mu=p.mu, k=p.k, e=p.e)
        assert simulate(0.05, p, 2).values[1] != simulate(0.05, p0, 2).values[1]


class TestLeeStep:
    def test_oracle_step(self):
        p = LeeParams(e1=5.0, e2=5.0, i1=5.0, i2=1.0, k=500.0)
        st1 = lee_step(OscState(0.5, 0.5, 0.5, 0.5), 0.2, p)
        assert st1.e == pytest.approx(0.549833997312478, abs=0)
        assert st1.i == pytest.approx(0.8807970779778823, abs=0)
        assert st1.omega == pytest.approx(0.549833997312478, abs=0)
        assert st1.out == pytest.approx(0.5498339966303122, abs=0)

    def test_outputs_in_sigmoid_range(self):
        p = LeeParams(5, 5, 5, 1)
        state = ZERO_STATE
        for _ in range(50):
            state = lee_step(state, 0.11, p)
            assert 0.0 < state.e < 1.0 and 0.0 < state.i < 1.0
            assert 0.0 < state.omega < 1.0
            assert -1.0 < state.out < 2.0

    def test_non_finite_stimulus_rejected(self):
        with pytest.raises(ValueError):
            lee_step(ZERO_STATE, math.inf, LeeParams(1, 1, 1, 1))


class TestSimulate:
    def test_length_and_dtype(self):
        traj = simulate(0.3, builtin_params(2), 17)
        assert traj.values.shape == (17,)
        assert traj.values.dtype == np.float64
        assert traj.states is None

    def test_recorded_states_align_with_values(self):
        traj = simulate(-0.4, builtin_params(4), 9, record_states=True)
        assert len(traj.states) == 9
        for st_, v in zip(traj.states, traj.values):
            assert st_.out == v

    def test_bad_step_count(self):
        with pytest.raises(ValueError):
            simulate(0.1, builtin_params(1), 0)

    @settings(max_examples=60, deadline=None)
    @given(
        type_id=st.integers(min_value=1, max_value=8),
        x=st.floats(min_value=-4.0, max_value=4.0,
                    allow_nan=False, allow_infinity=False),
    )
    def test_states_stay_bounded(self, type_id, x):
        traj = simulate(x, builtin_params(type_id), 30, record_states=True)
        assert np.all(np.isfinite(traj.values))
        for s in traj.states:
            assert abs(s.e) <= 1.0 and abs(s.i) <= 1.0 and abs(s.omega) <= 1.0
            assert abs(s.out) <= 3.0

    def test_envelope_far_from_origin_type1(self):
        # With k=500 the Gaussian kills the E-I term beyond |x| ~ 0.15, so
        # the settled output collapses onto tanh(mu * S).
        p = builtin_params(1)
        for x in (0.5, -0.5, 1.3, -2.0):
            s = x + math.copysign(p.e, x)
            tail = simulate(x, p, 200).values[-50:]
            assert np.max(np.abs(tail - math.tanh(p.mu * s))) <= 1e-3

    def test_chaotic_band_near_origin_type1(self):
        tail = simulate(0.05, builtin_params(1), 300).values[-100:]
        assert tail.max() - tail.min() > 0.01


class TestBifurcation:
    def test_shapes_and_grid(self):
        data = bifurcation_sweep(builtin_params(1), -1.0, 1.0, n_x=21,
                                 n_steps=120, keep_last=30)
        assert data.stimulus_grid.shape == (21,)
        assert data.outputs.shape == (21, 30)
        assert data.stimulus_grid[0] == -1.0 and data.stimulus_grid[-1] == 1.0
        assert np.all(np.diff(data.stimulus_grid) > 0)

    def test_single_point_grid(self):
        data = bifurcation_sweep(builtin_params(2), 0.3, 0.3, n_x=1,
                                 n_steps=50, keep_last=5)
        assert data.stimulus_grid.shape == (1,)
        assert data.outputs.shape == (1, 5)

    def test_rows_match_simulate_tail(self):
        p = builtin_params(6)
        data = bifurcation_sweep(p, -0.2, 0.2, n_x=5, n_steps=80, keep_last=11)
        for x, row in zip(data.stimulus_grid, data.outputs):
            assert np.array_equal(row, simulate(float(x), p, 80).values[-11:])

    def test_validation(self):
        p = builtin_params(1)
        with pytest.raises(ValueError):
            bifurcation_sweep(p, 1.0, -1.0, n_x=5)
        with pytest.raises(ValueError):
            bifurcation_sweep(p, -1.0, 1.0, n_x=0)
        with pytest.raises(ValueError):
            bifurcation_sweep(p, -1.0, 1.0, n_x=5, n_steps=10, keep_last=11)
        with pytest.raises(ValueError):
            BifurcationData(np.array([1.0, 0.5]), np.zeros((2, 3)))

    def test_csv_round_trip(self, tmp_path):
        data = bifurcation_sweep(builtin_params(3), -0.5, 0.5, n_x=4,
                                 n_steps=40, keep_last=6)
        path = tmp_path / "bif.csv"
        write_bifurcation_csv(data, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "x,lors"
        assert len(lines) == 1 + 4 * 6
        parsed = np.array([[float(a) for a in ln.split(",")] for ln in lines[1:]])
        assert np.array_equal(parsed[:, 1].reshape(4, 6), data.outputs)
        assert np.array_equal(parsed[::6, 0], data.stimulus_grid)
