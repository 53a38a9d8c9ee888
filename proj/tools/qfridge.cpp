// qfridge - command line front end. Exit codes: 0 ok, 2 config error,
// 3 numerical error, 4 validation tolerance failure.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "qfridge/commands.hpp"
#include "qfridge/config.hpp"

namespace fs = std::filesystem;
using namespace qfridge;

namespace {

struct Options {
    std::string config_file;
    std::string preset;
    std::string out_dir;
    int jobs = 0;
    double tol = 0.0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

config::RunConfig load(const Options& o) {
    if (o.config_file.empty() && o.preset.empty()) throw ConfigError("give --config FILE or --preset NAME");
    config::Document d;
    if (!o.preset.empty()) d = config::parse_document(config::preset_text(o.preset));
    if (!o.config_file.empty()) {
        try {
            d = config::merge(std::move(d), config::parse_document(read_file(o.config_file)));
        } catch (const ConfigError& e) {
            throw ConfigError(o.config_file + ": " + e.what());
        }
    }
    auto c = config::parse(d);
    if (o.tol > 0) c.residual_tol = o.tol;
    return c;
}

void emit(const Options& o, const std::string& name, const csv::Table& t, const config::RunConfig& c) {
    std::ostringstream ss;
    t.write(ss, c);
    if (o.out_dir.empty()) {
        std::cout << ss.str();
        return;
    }
    fs::create_directories(o.out_dir);
    const auto path = fs::path(o.out_dir) / (name + ".csv");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    f << ss.str();
    std::cerr << "wrote " << path.string() << " (" << t.size() << " rows)\n";
}

int run(const std::string& cmd, const Options& o) {
    const auto c = load(o);
    if (cmd == "config") {
        std::cout << config::dump(c);
        return commands::kOk;
    }
    if (cmd == "floquet") emit(o, cmd, commands::floquet(c), c);
    else if (cmd == "currents") emit(o, cmd, commands::currents(c), c);
    else if (cmd == "limits") emit(o, cmd, commands::limits(c), c);
    else if (cmd == "spectrum") emit(o, cmd, commands::spectrum(c), c);
    else if (cmd == "sweep") emit(o, cmd, commands::sweep(c, o.jobs), c);
    else if (cmd == "validate") {
        const auto v = commands::validate(c);
        for (const auto& ch : v.checks)
            std::cerr << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": oracle " << config::format_double(ch.oracle)
                      << " reference " << config::format_double(ch.reference) << " error "
                      << config::format_double(ch.error) << " tolerance " << config::format_double(ch.tolerance)
                      << "\n";
        emit(o, cmd, commands::validation_table(v), c);
        return v.pass() ? commands::kOk : commands::kValidation;
    }
    return commands::kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Floquet heat currents and cooling limits of a driven oscillator between two baths"};
    app.require_subcommand(1);
    Options o;
    const char* names[][2] = {{"floquet", "Floquet coefficients A_k on the [grid] frequencies"},
                              {"currents", "heat currents per reservoir and channel"},
                              {"limits", "cooling limit for the [limits] method"},
                              {"spectrum", "photon emission spectrum and line rates"},
                              {"sweep", "one quantity family over the [sweep] axis"},
                              {"validate", "oracle against the Floquet formulas"},
                              {"config", "print the canonical configuration"}};
    for (auto& [name, help] : names) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config_file, "configuration file");
        sub->add_option("--preset", o.preset, "built-in preset; --config keys override it");
        sub->add_option("--out", o.out_dir, "directory for <command>.csv (default: stdout)");
        sub->add_option("--jobs", o.jobs, "sweep workers (default: logical cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("--tol", o.tol, "Floquet residual tolerance")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : commands::kConfig;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        return run(cmd, o);
    } catch (const Error& e) {
        std::cerr << "qfridge " << cmd << ": " << e.what() << "\n";
        return commands::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "qfridge " << cmd << ": " << e.what() << "\n";
        return commands::kNumerical;
    }
}
