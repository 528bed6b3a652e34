"""Smoke tests for the python module: mesh construction, the diffusion model,
assembly, and a short solver run on a coarse mesh."""

import math

import pytest

import descent_pde as dp


def test_mesh_counts_and_area():
    mesh = dp.build_lshape(0)
    assert mesh.num_triangles() == 6
    assert mesh.num_vertices() == 8
    assert abs(mesh.total_area() - 3.0) < 1e-12
    assert dp.interior_dof_count(mesh) == 0

    fine = dp.refine_uniform(mesh)
    assert fine.num_triangles() == 24
    assert dp.interior_dof_count(dp.build_lshape(1)) == 5


def test_carreau_model():
    model = dp.carreau(dp.CarreauParams(mu_inf=1.0, mu_0=100.0, **{"lambda": 2.0}, r=1.4))
    assert model.mu(0.0) == pytest.approx(100.0)
    assert model.psi(0.0) == 0.0
    assert model.m_mu == 1.0 and model.M_mu == 100.0
    report = dp.check_monotonicity(model, 100)
    assert report.pass_

    with pytest.raises(ValueError):
        dp.CarreauParams(mu_inf=1.0, mu_0=0.5, **{"lambda": 2.0}, r=1.4)


def test_linear_problem_one_step_convergence():
    sys = dp.FemSystem(dp.build_lshape(3), dp.constant_diffusion(2.0))
    n = sys.num_dofs()
    assert n > 0
    assert sys.energy([0.0] * n) == 0.0

    cfg = dp.SolverConfig()
    cfg.tol_x = 1e-9
    u_ref = dp.fixed_point_step(dp.Method.kacanov, sys, [0.0] * n)
    log = dp.fixed_point_run(dp.Method.newton, sys, cfg, u_ref)
    assert log.converged
    assert log.steps_to_tol == 1


def test_energy_decay_on_carreau_case():
    sys = dp.FemSystem(dp.build_lshape(3), dp.carreau(dp.CarreauParams()))
    n = sys.num_dofs()
    u = [0.0] * n
    cfg = dp.SolverConfig()
    cfg.max_iter = 25
    # crude reference: a few kacanov sweeps
    ref = u
    for _ in range(40):
        ref = dp.fixed_point_step(dp.Method.kacanov, sys, ref)
    log = dp.pncg_run(dp.Method.kacanov, sys, cfg, ref)
    assert log.converged
    energies = [rec.energy for rec in log.records]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_experiment_config_roundtrip(tmp_path):
    cfg = dp.ExperimentConfig.from_json_text(
        '{"mesh_level": 2, "constant_mu": 1.5, '
        '"reference": {"method": "kacanov", "kacanov_steps": 10}}'
    )
    cfg.output_dir = str(tmp_path / "out")
    sys = cfg.build_system()
    ref = dp.compute_reference(cfg, sys, use_cache=False)
    assert math.isfinite(sys.x_norm(ref))
    report = dp.run_checks(cfg)
    assert report.all_pass()
