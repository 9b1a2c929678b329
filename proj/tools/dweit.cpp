// dweit: probe spectra of a double-well Λ condensate from the command line.
//
//   dweit scan --config fig2.json [--grid min,max,n] [--refine] [--format csv|json]
//              [--oracle-check] [--out file]
//   dweit sweep-phi --config fig3.json --phi 0,0.3927,0.7854
//   dweit compare-oracle --config eit.json --delta-p 0.1,0.3
//
// Flags override the matching config keys.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dweit/cli.hpp"

namespace {

struct Options {
    std::string config;
    std::string out = "-";
    std::vector<double> grid;
    bool refine = false;
    bool oracle_check = false;
    std::string format;
    std::string units;
    unsigned threads = 0;
    std::vector<double> phi;
    std::vector<double> delta_p;
    double t_max = -1.0;
};

nlohmann::json merged_config(const Options& opt)
{
    nlohmann::json j = opt.config.empty() ? nlohmann::json::object()
                                          : dweit::read_json_file(opt.config);
    if (!j.is_object())
        throw dweit::Error(dweit::ErrorCode::BadConfig, "config must be a flat JSON object");
    if (!opt.grid.empty()) {
        if (opt.grid.size() != 3 || opt.grid[2] < 0.0 || opt.grid[2] != static_cast<long long>(opt.grid[2]))
            throw dweit::Error(dweit::ErrorCode::BadConfig, "--grid takes min,max,count");
        j["grid_min"] = opt.grid[0];
        j["grid_max"] = opt.grid[1];
        j["grid_count"] = static_cast<long long>(opt.grid[2]);
    }
    if (opt.refine)
        j["refine"] = true;
    if (opt.oracle_check)
        j["oracle_check"] = true;
    if (!opt.format.empty())
        j["format"] = opt.format;
    if (!opt.units.empty())
        j["units"] = opt.units;
    if (opt.threads > 0)
        j["threads"] = opt.threads;
    if (!opt.phi.empty())
        j["phi"] = opt.phi;
    if (!opt.delta_p.empty())
        j["delta_p"] = opt.delta_p;
    if (opt.t_max >= 0.0)
        j["t_max"] = opt.t_max;
    return j;
}

template <class Command>
int run(const Options& opt, dweit::Validation mode, Command&& command)
{
    try {
        const dweit::cli::RunConfig cfg = dweit::cli::load_config(merged_config(opt), mode);
        std::ostringstream buffer;
        command(cfg, buffer);
        if (opt.out == "-") {
            std::cout << buffer.str();
        } else {
            std::ofstream file(opt.out, std::ios::binary);
            if (!file) {
                std::cerr << "cannot write '" << opt.out << "'\n";
                return 1;
            }
            file << buffer.str();
        }
        return 0;
    } catch (const dweit::Error& e) {
        std::cerr << "dweit: " << e.what() << '\n';
        return dweit::cli::exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "dweit: " << e.what() << '\n';
        return 1;
    }
}

void add_common(CLI::App* sub, Options& opt)
{
    sub->add_option("--config", opt.config, "flat JSON configuration file");
    sub->add_option("--out", opt.out, "output file, - for stdout");
    sub->add_option("--units", opt.units, "rate units of the inputs")
        ->check(CLI::IsMember({"gamma_ab", "si"}));
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Weak-probe spectra of a double-well Lambda condensate"};
    app.require_subcommand(1);
    Options opt;

    auto* scan = app.add_subcommand("scan", "detuning scan of the susceptibility");
    add_common(scan, opt);
    scan->add_option("--grid", opt.grid, "min,max,count")->delimiter(',')->expected(3);
    scan->add_flag("--refine", opt.refine, "refine the grid around predicted resonances");
    scan->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    scan->add_flag("--oracle-check", opt.oracle_check, "append the closed-form residual column");
    scan->add_option("--threads", opt.threads, "worker threads");

    auto* sweep = app.add_subcommand("sweep-phi", "resonance heights against the preparation angle");
    add_common(sweep, opt);
    sweep->add_option("--phi", opt.phi, "comma-separated angles")->delimiter(',');

    auto* compare = app.add_subcommand("compare-oracle", "closed form, linear solve and integration");
    add_common(compare, opt);
    compare->add_option("--delta-p", opt.delta_p, "comma-separated detunings")->delimiter(',');
    compare->add_option("--t-max", opt.t_max, "integration horizon");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*scan)
        return run(opt, dweit::Validation::Strict,
                   [](const auto& cfg, std::ostream& out) { dweit::cli::cmd_scan(cfg, out); });
    if (*sweep)
        return run(opt, dweit::Validation::Strict,
                   [](const auto& cfg, std::ostream& out) { dweit::cli::cmd_sweep_phi(cfg, out); });
    return run(opt, dweit::Validation::AllowLossless,
               [](const auto& cfg, std::ostream& out) { dweit::cli::cmd_compare_oracle(cfg, out); });
}
