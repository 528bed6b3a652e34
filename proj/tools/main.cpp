#include "descent/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int cmd_mesh_info(int level, const std::string& dump_path) {
    const auto mesh = descent::build_lshape(level);
    const auto dofs = descent::interior_dof_map(mesh);
    std::printf("level      %d\n", mesh.level);
    std::printf("vertices   %d\n", mesh.num_vertices());
    std::printf("triangles  %d\n", mesh.num_triangles());
    std::printf("dofs       %d\n", dofs.count);
    std::printf("area       %.15g\n", mesh.total_area());
    if (!dump_path.empty()) {
        std::ofstream out(dump_path);
        if (!out) {
            std::fprintf(stderr, "cannot open %s for writing\n", dump_path.c_str());
            return 1;
        }
        char line[96];
        for (const auto& v : mesh.vertices) {
            std::snprintf(line, sizeof line, "v %.17g %.17g\n", v[0], v[1]);
            out << line;
        }
        for (const auto& t : mesh.triangles) {
            std::snprintf(line, sizeof line, "t %d %d %d\n", t[0], t[1], t[2]);
            out << line;
        }
        std::printf("mesh dumped to %s\n", dump_path.c_str());
    }
    return 0;
}

int cmd_reference(const std::string& config_path) {
    const auto cfg = descent::ExperimentConfig::from_json_file(config_path);
    const auto sys = cfg.build_system();
    const auto u_ref = descent::compute_reference(cfg, sys);
    const auto residual = sys.residual(u_ref);
    std::printf("case (%s), mesh level %d, dofs %d\n", cfg.case_label.c_str(), cfg.mesh_level,
                sys.num_dofs());
    std::printf("|u_ref|_X    %.12g\n", sys.x_norm(u_ref));
    std::printf("|F(u_ref)|   %.3e  (|b| = %.3e)\n", descent::norm2(residual),
                descent::norm2(sys.load()));
    std::printf("cache file   %s\n", descent::reference_cache_path(cfg).string().c_str());
    return 0;
}

int cmd_table(const std::string& config_path, bool paper_scale) {
    auto cfg = descent::ExperimentConfig::from_json_file(config_path);
    if (paper_scale) cfg.mesh_level = 7;
    const auto result = descent::run_table(cfg);
    descent::write_table_outputs(result);
    std::cout << descent::format_table_text(result);
    for (const auto& cell : result.cells)
        if (cell.status != "ok")
            std::cout << cell.config.label() << ": " << cell.status << "\n";
    std::cout << "outputs written to " << cfg.output_dir << "\n";
    return 0;
}

int cmd_checks(const std::string& config_path) {
    const auto cfg = descent::ExperimentConfig::from_json_file(config_path);
    const auto report = descent::run_checks(cfg);
    std::cout << descent::format_check_report(report);
    return report.all_pass() ? 0 : 1;
}

int cmd_converge(const std::string& config_path, const std::string& levels_arg) {
    const auto cfg = descent::ExperimentConfig::from_json_file(config_path);
    std::vector<int> levels;
    std::stringstream ss(levels_arg);
    std::string item;
    while (std::getline(ss, item, ',')) levels.push_back(std::stoi(item));
    const auto report = descent::fem_convergence_probe(cfg, levels);
    std::cout << descent::format_probe_report(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasilinear elliptic solver toolkit on the L-shape"};
    app.require_subcommand(1);

    int level = 3;
    std::string dump_path;
    auto* mesh_info = app.add_subcommand("mesh-info", "print mesh statistics");
    mesh_info->add_option("--level", level, "refinement level")->required();
    mesh_info->add_option("--dump", dump_path, "write the mesh as text (v x y / t i j k lines)");

    std::string config_path;
    auto* reference = app.add_subcommand("reference", "compute and cache the reference solution");
    reference->add_option("--config", config_path, "experiment config (JSON)")->required();

    bool paper_scale = false;
    auto* table = app.add_subcommand("table", "run the iteration-count table");
    table->add_option("--config", config_path, "experiment config (JSON)")->required();
    table->add_flag("--paper-scale", paper_scale, "use mesh level 7 (~1e5 triangles)");

    auto* checks = app.add_subcommand("checks", "run the property-check battery");
    checks->add_option("--config", config_path, "experiment config (JSON)")->required();

    std::string levels_arg = "3,4,5";
    auto* converge = app.add_subcommand("converge", "discretisation convergence probe");
    converge->add_option("--config", config_path, "experiment config (JSON)")->required();
    converge->add_option("--levels", levels_arg, "comma-separated mesh levels");

    CLI11_PARSE(app, argc, argv);

    try {
        if (mesh_info->parsed()) return cmd_mesh_info(level, dump_path);
        if (reference->parsed()) return cmd_reference(config_path);
        if (table->parsed()) return cmd_table(config_path, paper_scale);
        if (checks->parsed()) return cmd_checks(config_path);
        if (converge->parsed()) return cmd_converge(config_path, levels_arg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
