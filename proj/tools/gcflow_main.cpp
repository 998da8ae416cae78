#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gcflow/config.hpp"
#include "gcflow/csv.hpp"
#include "gcflow/pipeline.hpp"

using namespace gcflow;

namespace {

void print_report(const RunReport& rep, const std::string& out_dir) {
    std::printf("%-10s %-7s %9s  %s\n", "stage", "status", "seconds", "message");
    for (const StageStatus& s : rep.stages) {
        if (s.status == "skipped")
            std::printf("%-10s %-7s %9s\n", s.name.c_str(), s.status.c_str(), "-");
        else
            std::printf("%-10s %-7s %9.3f  %s\n", s.name.c_str(), s.status.c_str(), s.seconds,
                        s.message.c_str());
    }
    for (const Measured& m : rep.constants)
        std::printf("  %s = %s\n", m.key.c_str(), fmt_double(m.value).c_str());
    std::printf("violation = %s\n", rep.violation ? "true" : "false");
    std::printf("outputs in %s\n", out_dir.c_str());
}

struct Cli {
    std::string config_path;
    std::string out_dir;
    std::string stage_list;
    bool expect_blowup = false;
    double resolution_scale = 1.0;
};

std::vector<std::string> split_stages(const std::string& list) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= list.size()) {
        size_t comma = list.find(',', pos);
        if (comma == std::string::npos) comma = list.size();
        std::string item = list.substr(pos, comma - pos);
        if (!item.empty()) out.push_back(item);
        pos = comma + 1;
    }
    return out;
}

int run(const Cli& cli, const std::vector<std::string>& stages) {
    ExperimentConfig cfg;
    try {
        if (!cli.config_path.empty()) cfg = load_config(cli.config_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    RunOptions opt;
    opt.resolution_scale = cli.resolution_scale;
    opt.stage_filter = stages;
    if (!cli.out_dir.empty()) opt.out_override = cli.out_dir;
    if (const char* env = std::getenv("GCFLOW_OUT"); env && *env) opt.out_override = env;

    try {
        RunReport rep = run_experiment(cfg, opt);
        print_report(rep, opt.out_override.empty() ? cfg.out_dir : opt.out_override);
        return exit_code(rep, cli.expect_blowup);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gauss-Codazzi flow laboratory: solve, certify, glue, immerse"};
    app.require_subcommand(1);

    Cli cli;
    app.add_option("--config", cli.config_path, "experiment config file (key = value sections)");
    app.add_option("--out", cli.out_dir, "output directory (env GCFLOW_OUT overrides)");
    app.add_flag("--expect-blowup", cli.expect_blowup,
                 "invert the verdict: exit 0 when a violation/blowup is detected");
    app.add_option("--resolution-scale", cli.resolution_scale,
                   "refine dx by this factor; snapshot times stay fixed");

    CLI::App* cmd_run = app.add_subcommand("run", "run the full pipeline (or --stage subset)");
    cmd_run->add_option("--stage", cli.stage_list, "comma-separated stage subset");
    cmd_run->fallthrough();
    for (const char* name : kStageNames)
        app.add_subcommand(name, std::string("run the ") + name + " stage")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    std::vector<std::string> stages;
    if (sub == cmd_run) {
        stages = split_stages(cli.stage_list);
        for (const std::string& s : stages) {
            bool known = false;
            for (const char* name : kStageNames) known = known || s == name;
            if (!known) {
                std::fprintf(stderr, "error: unknown stage '%s'\n", s.c_str());
                return 2;
            }
        }
    } else {
        stages = {sub->get_name(), "report"};
        if (sub->get_name() == "report") stages = {"report"};
    }
    return run(cli, stages);
}
