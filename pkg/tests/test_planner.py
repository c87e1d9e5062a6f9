import math

import pytest
from hypothesis import given, strategies as st

from pulsebench.device import amplitude_code_to_volts
from pulsebench.emulator import apply_command, initial_state
from pulsebench.planner import (
    Basis,
    Intensity,
    ModulatorCalibration,
    PlanError,
    QkdSymbol,
    UnreachableSetpoint,
    format_plan,
    format_symbols,
    intensity_transmission,
    parse_symbols,
    phase_shift,
    plan_sequence,
    plan_symbol,
    voltage_for_phase,
    voltage_for_transmission,
)

CAL = ModulatorCalibration()


def firing_map(slot):
    return {f.channel.label: f for f in slot.firings}


class TestTransferFunctions:
    def test_transmission_endpoints(self):
        assert intensity_transmission(0.0, 5.0) == 0.0
        assert intensity_transmission(5.0, 5.0) == pytest.approx(1.0, abs=1e-15)

    def test_transmission_half_wave_midpoint(self):
        assert intensity_transmission(2.5, 5.0) == pytest.approx(0.5, abs=1e-15)

    def test_transmission_monotone_on_branch(self):
        values = [intensity_transmission(v, 5.0) for v in
                  [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]]
        assert values == sorted(values)

    def test_transmission_outside_branch_rejected(self):
        with pytest.raises(PlanError, match="branch"):
            intensity_transmission(5.1, 5.0)

    def test_phase_linear(self):
        assert phase_shift(0.0, 5.0) == 0.0
        assert phase_shift(5.0, 5.0) == pytest.approx(math.pi)
        assert phase_shift(2.5, 5.0) == pytest.approx(math.pi / 2)


class TestVoltageForTransmission:
    def test_zero_target(self):
        assert voltage_for_transmission(0.0, 5.0).code == 0

    def test_full_target_exact_grid_point(self):
        sp = voltage_for_transmission(1.0, 5.0)
        assert sp.code == 100
        assert sp.volts == 5.0

    def test_half_target_lands_on_grid(self):
        # Forward-oracle check: re-applying the transfer must give 0.5 exactly.
        sp = voltage_for_transmission(0.5, 5.0)
        assert sp.code == 50
        assert intensity_transmission(2.5, 5.0) == pytest.approx(0.5, abs=1e-15)
        assert sp.residual == pytest.approx(0.0, abs=1e-12)

    def test_unreachable_setpoint(self):
        with pytest.raises(UnreachableSetpoint):
            voltage_for_transmission(1.0, 6.5)  # needs 6.5 V, grid tops at 6 V

    @given(st.floats(0.0, 1.0, allow_nan=False))
    def test_quantization_error_bound(self, target):
        # Worst-case |dT/dv| on the branch is pi/(2*v_pi); one full step of
        # 0.05 V bounds the achieved-transmission error.
        sp = voltage_for_transmission(target, CAL.v_pi)
        bound = (math.pi / (2 * CAL.v_pi)) * 0.05
        assert abs(sp.achieved - target) <= bound

    @given(st.floats(0.0, math.pi))
    def test_phase_quantization(self, phi):
        sp = voltage_for_phase(phi, CAL.v_pi)
        assert abs(sp.achieved - phi) <= (math.pi / CAL.v_pi) * 0.05

    @given(
        st.floats(0.5, 12.0),
        st.floats(0.05, 1.0),
        st.sampled_from(list(Intensity)),
        st.sampled_from(list(Basis)),
        st.integers(0, 1),
    )
    def test_random_calibrations_never_clip_silently(self, v_pi, mu, intensity,
                                                     basis, bit):
        # Either every planned code is on the grid, or planning refuses.
        cal = ModulatorCalibration(
            v_pi=v_pi,
            intensity_targets={
                Intensity.SIGNAL: mu,
                Intensity.DECOY: mu / 5.0,
                Intensity.VACUUM: 0.0,
            },
        )
        try:
            slot = plan_symbol(QkdSymbol(intensity, basis, bit), cal)
        except PlanError:
            assert v_pi > 6.0  # only an off-grid full-drive can fail
            return
        for f in slot.firings:
            assert 0 <= f.amplitude <= 120


class TestPlanSymbol:
    def test_z_bit0_fires_early_bin(self):
        slot = plan_symbol(QkdSymbol(Intensity.SIGNAL, Basis.Z, 0), CAL)
        fm = firing_map(slot)
        assert "AT1" in fm and "AT2" not in fm
        assert "AP1" not in fm and "AP2" not in fm
        assert fm["AD1"].amplitude == voltage_for_transmission(1.0, CAL.v_pi).code

    def test_z_bit1_fires_late_bin(self):
        fm = firing_map(plan_symbol(QkdSymbol(Intensity.SIGNAL, Basis.Z, 1), CAL))
        assert "AT2" in fm and "AT1" not in fm

    def test_x_bit1_pi_phase_on_late_bin(self):
        fm = firing_map(plan_symbol(QkdSymbol(Intensity.SIGNAL, Basis.X, 1), CAL))
        assert "AT1" in fm and "AT2" in fm  # both bins survive
        assert fm["AP2"].amplitude == voltage_for_phase(math.pi, CAL.v_pi).code
        assert amplitude_code_to_volts(fm["AP2"].amplitude) == CAL.v_pi

    def test_x_bit0_zero_phase(self):
        fm = firing_map(plan_symbol(QkdSymbol(Intensity.SIGNAL, Basis.X, 0), CAL))
        assert fm["AP2"].amplitude == 0

    def test_vacuum_zero_transmission_no_encoders(self):
        for basis, bit in ((Basis.Z, 0), (Basis.X, 1)):
            fm = firing_map(plan_symbol(QkdSymbol(Intensity.VACUUM, basis, bit), CAL))
            assert fm["AD1"].amplitude == 0 and fm["AD3"].amplitude == 0
            assert "AT1" not in fm and "AT2" not in fm
            assert "AP1" not in fm and "AP2" not in fm
            # Choppers keep carving both bins so slot timing stays uniform.
            assert "AC1" in fm and "AC2" in fm

    def test_chopper_always_fires_both_bins(self):
        for intensity in Intensity:
            fm = firing_map(plan_symbol(QkdSymbol(intensity, Basis.Z, 0), CAL))
            assert fm["AC1"].start < fm["AC2"].start

    def test_intensity_ordering(self):
        def coarse_transmission(intensity):
            fm = firing_map(plan_symbol(QkdSymbol(intensity, Basis.Z, 0), CAL))
            volts = amplitude_code_to_volts(fm["AD1"].amplitude)
            return intensity_transmission(min(volts, CAL.v_pi), CAL.v_pi)

        t_vac = coarse_transmission(Intensity.VACUUM)
        t_decoy = coarse_transmission(Intensity.DECOY)
        t_signal = coarse_transmission(Intensity.SIGNAL)
        assert t_vac == 0.0
        assert t_vac <= t_decoy < t_signal

    def test_firings_fit_slot(self):
        for basis in Basis:
            for bit in (0, 1):
                slot = plan_symbol(QkdSymbol(Intensity.SIGNAL, basis, bit), CAL)
                for f in slot.firings:
                    assert 0.0 <= f.start
                    assert f.start + f.width <= CAL.slot_period

    def test_basis_exclusivity_property(self):
        for intensity in (Intensity.SIGNAL, Intensity.DECOY):
            for bit in (0, 1):
                z = firing_map(plan_symbol(QkdSymbol(intensity, Basis.Z, bit), CAL))
                assert all(f.amplitude == 0 for label, f in z.items()
                           if label.startswith("AP"))
                x = firing_map(plan_symbol(QkdSymbol(intensity, Basis.X, bit), CAL))
                assert "AT1" in x and "AT2" in x


class TestPlanSequence:
    def test_empty_sequence(self):
        plan, commands = plan_sequence([], CAL)
        assert plan.slots == ()
        assert len(commands) == 1  # just the ARM

    def test_single_symbol_matches_plan_symbol(self):
        symbol = QkdSymbol(Intensity.SIGNAL, Basis.Z, 0)
        plan, _ = plan_sequence([symbol], CAL)
        assert plan.slots[0].firings == plan_symbol(symbol, CAL).firings

    def test_identical_symbols_give_identical_slots(self):
        symbol = QkdSymbol(Intensity.DECOY, Basis.X, 1)
        plan, _ = plan_sequence([symbol] * 5, CAL)
        first = plan.slots[0]
        for k, slot in enumerate(plan.slots):
            assert slot.index == k
            assert slot.firings == first.firings

    def test_replay_reconstructs_pattern(self):
        symbols = parse_symbols(
            "signal,Z,0\ndecoy,X,1\nvacuum,Z,1\nsignal,X,0\n"
        )
        plan, commands = plan_sequence(symbols, CAL)
        state = initial_state()
        for cmd in commands:
            state, reply = apply_command(state, cmd)
            assert reply.ok
        assert state.pattern == plan.wire_snapshots()
        # Live settings land on the last slot's firings.
        assert tuple(
            (s.amplitude, s.delay, s.enabled) for s in state.settings
        ) == plan.slots[-1].snapshot()

    def test_failing_symbol_reports_index_and_symbol(self):
        # v_pi beyond the grid makes the full-transmission chop unreachable;
        # the error must name the first slot that failed.
        cal = ModulatorCalibration(v_pi=6.5)
        with pytest.raises(PlanError, match=r"slot 0 \(vacuum,Z,0\)"):
            plan_sequence(
                [
                    QkdSymbol(Intensity.VACUUM, Basis.Z, 0),
                    QkdSymbol(Intensity.SIGNAL, Basis.Z, 0),
                ],
                cal,
            )

    def test_out_of_range_trim_rejected(self):
        cal = ModulatorCalibration(delay_trims={"AC1": 200})
        with pytest.raises(PlanError, match="delay"):
            plan_symbol(QkdSymbol(Intensity.SIGNAL, Basis.Z, 0), cal)

    def test_delay_trims_propagate(self):
        cal = ModulatorCalibration(delay_trims={"AC1": 12, "AT1": -4})
        fm = firing_map(plan_symbol(QkdSymbol(Intensity.SIGNAL, Basis.Z, 0), cal))
        assert fm["AC1"].delay == 12
        assert fm["AT1"].delay == -4
        assert fm["AC2"].delay == 0


class TestSerialization:
    def test_plan_format_golden(self):
        plan, _ = plan_sequence(
            [QkdSymbol(Intensity.SIGNAL, Basis.Z, 0)], CAL
        )
        text = format_plan(plan)
        assert text == (
            "0 | signal,Z,0 | AC1:100:0,AC2:100:0,AD1:100:0,AD2:100:0,"
            "AD3:100:0,AD4:100:0,AU1:100:0,AU2:100:0,AT1:100:0\n"
        )

    def test_symbol_file_round_trip(self):
        text = "signal,Z,0\ndecoy,X,1\nvacuum,Z,0\n"
        assert format_symbols(parse_symbols(text)) == text

    def test_symbol_file_allows_comments(self):
        symbols = parse_symbols("# header\n\nsignal,Z,0\n")
        assert len(symbols) == 1

    @pytest.mark.parametrize(
        "line,match",
        [
            ("signal,Z", "line 1"),
            ("bright,Z,0", "unknown intensity"),
            ("signal,Y,0", "unknown basis"),
            ("signal,Z,2", "bit"),
        ],
    )
    def test_symbol_file_errors_carry_line_numbers(self, line, match):
        with pytest.raises(PlanError, match=match):
            parse_symbols(line)


class TestCalibrationValidation:
    def test_defaults_are_valid(self):
        cal = ModulatorCalibration()
        assert cal.intensity_targets[Intensity.SIGNAL] == 0.5
        assert cal.intensity_targets[Intensity.DECOY] == 0.1

    def test_ordering_enforced(self):
        with pytest.raises(ValueError, match="signal > decoy"):
            ModulatorCalibration(
                intensity_targets={
                    Intensity.SIGNAL: 0.1,
                    Intensity.DECOY: 0.5,
                    Intensity.VACUUM: 0.0,
                }
            )

    def test_bin_separation_must_fit(self):
        with pytest.raises(ValueError, match="slot period"):
            ModulatorCalibration(bin_separation=11e-9)
