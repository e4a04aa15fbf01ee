// qcorr — scenario runner: quantum marginals, completeness feasibility, Bell
// analyses, entropy inequalities, and exact-oracle cross-checks.
//
// Exit codes: 0 = ran with every check satisfied, 1 = ran and found
// violations (or a section failed), 2 = input error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "qcorr/report.hpp"
#include "qcorr/scenario.hpp"

namespace {

struct CommonArgs {
    std::string file;
    std::string format = "text";
    int max_subset = 0;  // 0 = scenario default
    bool full_sphere = false;
    bool timestamp = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("file", args.file, "scenario file (JSON)")->required();
    cmd->add_option("--format", args.format, "output format")
        ->check(CLI::IsMember({"text", "structured"}))
        ->capture_default_str();
    cmd->add_option("--max-subset", args.max_subset,
                    "cap on the commuting-subset size for defined marginals");
    cmd->add_flag("--full-sphere", args.full_sphere,
                  "search the full Bloch sphere in the CHSH maximization");
    cmd->add_flag("--timestamp", args.timestamp, "include a timestamp in the report");
}

int run_mode(const CommonArgs& args, qcorr::cli::RunOptions opt,
             const char* required_section) {
    std::ifstream in(args.file);
    if (!in) {
        std::cerr << "error: cannot open '" << args.file << "'\n";
        return 2;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    qcorr::cli::ScenarioFile scenario;
    try {
        scenario = qcorr::cli::parse_scenario(buffer.str());
    } catch (const qcorr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    if (required_section) {
        const std::string s(required_section);
        const bool ok = (s == "bell" && scenario.bell_request.has_value()) ||
                        (s == "entropy" && scenario.entropy_request.has_value()) ||
                        (s == "rvr" && scenario.rvr.has_value());
        if (!ok) {
            std::cerr << "error: scenario does not configure the '" << s << "' analysis\n";
            return 2;
        }
    }

    if (args.max_subset > 0) opt.max_subset_override = args.max_subset;
    opt.full_sphere = args.full_sphere;
    opt.timestamp = args.timestamp;

    const qcorr::cli::Report report = qcorr::cli::run(scenario, opt);
    std::cout << (args.format == "structured" ? qcorr::cli::emit_structured(report)
                                              : qcorr::cli::emit_text(report));
    if (report.violations || report.section_errors) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum vs classical correlation analysis"};
    app.require_subcommand(1);

    CommonArgs check_args, bell_args, entropy_args, oracle_args;
    CLI::App* check = app.add_subcommand("check", "run every analysis the scenario configures");
    add_common(check, check_args);
    CLI::App* bell = app.add_subcommand("bell", "run only the Bell analysis");
    add_common(bell, bell_args);
    CLI::App* entropy = app.add_subcommand("entropy", "run only the entropy analysis");
    add_common(entropy, entropy_args);
    CLI::App* oracle = app.add_subcommand(
        "oracle", "run the completeness pipeline with the exact rational oracle and diff");
    add_common(oracle, oracle_args);

    CLI11_PARSE(app, argc, argv);

    using qcorr::cli::RunOptions;
    using qcorr::cli::Section;

    if (check->parsed()) return run_mode(check_args, RunOptions{}, nullptr);
    if (bell->parsed()) {
        RunOptions opt;
        opt.only = std::set<Section>{Section::bell};
        return run_mode(bell_args, opt, "bell");
    }
    if (entropy->parsed()) {
        RunOptions opt;
        opt.only = std::set<Section>{Section::entropy};
        return run_mode(entropy_args, opt, "entropy");
    }
    RunOptions opt;
    opt.only = std::set<Section>{Section::rvr, Section::oracle};
    opt.include_oracle = true;
    return run_mode(oracle_args, opt, "rvr");
}
