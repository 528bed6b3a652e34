#pragma once

#include "descent/solvers.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace descent {

enum class ReferenceMethod { kacanov_fixed_steps, newton_to_residual };

struct ReferenceSpec {
    ReferenceMethod method = ReferenceMethod::kacanov_fixed_steps;
    int kacanov_steps = 1000;
    double newton_residual_tol = 1e-13;

    void validate() const;
    std::string tag() const;  // cache key component
};

// Diffusion coefficient selection: Carreau by default, constant for debugging.
struct DiffusionSpec {
    std::optional<CarreauParams> carreau_params = CarreauParams{};
    double constant_value = 1.0;

    DiffusionModel make() const;
    std::string tag() const;  // cache key component
};

struct ExperimentConfig {
    std::string case_label = "a";
    int mesh_level = 6;
    DiffusionSpec diffusion;
    ReferenceSpec reference;
    std::string output_dir = "out";
    double tol_x = 1e-6;
    bool relative_tol = false;
    int max_iter = 100;
    double delta_z = 0.03;
    double delta_n = 1.0;
    LineSearchConfig line_search;
    std::vector<SolverConfig> solvers;  // empty selects the full 3x3 matrix

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);

    // The solver matrix to run: explicit list, or (Zarantonello, Kacanov,
    // Newton) x (FP, PNCG-FR, PNCG-PR+) with this config's shared settings.
    std::vector<SolverConfig> solver_matrix() const;
    SolverConfig base_solver_config() const;
    FemSystem build_system() const;
};

// Cache directory: DESCENT_PDE_CACHE env var if set, else <output_dir>/cache.
std::filesystem::path cache_dir(const ExperimentConfig& cfg);
std::filesystem::path reference_cache_path(const ExperimentConfig& cfg);

// Flat binary reference cache: magic "DPDEREF1", u32 version, u64 length,
// then length 8-byte doubles.
void write_reference_file(const std::filesystem::path& path, std::span<const double> u);
std::optional<std::vector<double>> read_reference_file(const std::filesystem::path& path,
                                                       std::size_t expected_length);

// Discrete reference solution: 1000 Kacanov steps from zero by default, or
// Newton iterated to the residual tolerance (with a stagnation stop at the
// rounding floor). Cached on disk keyed by (level, diffusion, mode).
std::vector<double> compute_reference(const ExperimentConfig& cfg, const FemSystem& sys,
                                      bool use_cache = true);

struct TableCell {
    SolverConfig config;
    IterationLog log;
    std::string status;  // "ok" or "err: <reason>"
};

struct TableResult {
    ExperimentConfig config;
    std::vector<TableCell> cells;
    double reference_norm_x = 0.0;
    std::vector<double> reference;
};

// Runs the solver matrix against the reference and writes, under output_dir:
// table.txt (paper layout, '-' for non-convergence), table.csv
// (case,method,mode,beta_rule,steps,converged) and per-run history CSVs
// (step,error_X,energy,alpha,beta).
TableResult run_table(const ExperimentConfig& cfg);

std::string format_table_text(const TableResult& result);
void write_table_outputs(const TableResult& result);  // table.txt, table.csv, histories

struct CheckItem {
    std::string name;
    bool pass = false;
    double margin = 0.0;  // worst margin, >= 0 means satisfied
    std::string detail;
};

struct CheckReport {
    std::vector<CheckItem> items;
    bool all_pass() const;
};

// The invariant battery: mesh invariants, diffusion monotonicity, spectral
// sandwich, strong monotonicity/Lipschitz sampling, energy/gradient
// consistency, energy decay. Dof-dependent checks are skipped when m_h = 0.
CheckReport run_checks(const ExperimentConfig& cfg);
// Same battery on a caller-supplied system (lets tests inject corrupted models).
CheckReport run_checks(const FemSystem& sys, const ExperimentConfig& cfg);
std::string format_check_report(const CheckReport& report);

struct ProbeRow {
    int level = 0;
    int dofs = 0;
    double error_vs_exact = 0.0;        // ||u_ref - u*||_X, quadrature vs analytic gradient
    double error_vs_interpolant = 0.0;  // ||u_ref - I_h u*||_X
};

struct ProbeReport {
    std::vector<ProbeRow> rows;
    std::vector<double> ratios;  // successive error_vs_exact ratios, ~2 expected
};

// Discretisation-rate sanity check across levels.
ProbeReport fem_convergence_probe(const ExperimentConfig& cfg, const std::vector<int>& levels);
std::string format_probe_report(const ProbeReport& report);

}  // namespace descent
