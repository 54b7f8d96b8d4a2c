#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dyncirc/bv.hpp"
#include "dyncirc/pcm.hpp"
#include "dyncirc/qasm.hpp"
#include "dyncirc/qcp.hpp"
#include "dyncirc/randgen.hpp"
#include "dyncirc/sim.hpp"

using namespace dyncirc;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Logging, controlled by DYNCIRC_LOG (debug|info|warn|error; default warn).
// ---------------------------------------------------------------------------

enum class LogLevel { Debug = 0, Info, Warn, Error };

LogLevel log_threshold() {
    static LogLevel level = [] {
        const char* env = std::getenv("DYNCIRC_LOG");
        std::string v = env ? env : "warn";
        if (v == "debug") return LogLevel::Debug;
        if (v == "info") return LogLevel::Info;
        if (v == "error") return LogLevel::Error;
        return LogLevel::Warn;
    }();
    return level;
}

void log(LogLevel level, const std::string& msg) {
    if (level < log_threshold()) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

// ---------------------------------------------------------------------------
// Shared I/O helpers
// ---------------------------------------------------------------------------

struct ProcessingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Circuit read_circuit(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProcessingError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        return qasm::from_json(json::parse(text));
    }
    return qasm::parse(text);
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw ProcessingError("cannot write " + path);
    out << text;
}

void write_circuit(const std::string& path, const Circuit& c, const std::string& format) {
    if (format == "json") {
        write_text(path, qasm::to_json(c).dump(2) + "\n");
    } else {
        write_text(path, qasm::serialize(c));
    }
}

pcm::PassConfig pass_config_of(std::size_t n_pcm, std::size_t n_max, const std::string& mode,
                               const std::string& soundness, std::uint64_t seed) {
    pcm::PassConfig cfg;
    cfg.n_pcm = n_pcm;
    cfg.n_max = n_max;
    cfg.mode = (mode == "faithful") ? pcm::PassMode::Faithful : pcm::PassMode::Conservative;
    cfg.reset_soundness =
        (soundness == "paper") ? pcm::ResetSoundness::Paper : pcm::ResetSoundness::Strict;
    cfg.seed = seed;
    return cfg;
}

json report_to_json(const pcm::PassReport& report) {
    json decisions = json::array();
    for (const auto& d : report.decisions) {
        decisions.push_back({{"instr_index", d.instr_index},
                             {"is_measure", d.is_measure},
                             {"fired", d.fired},
                             {"reason", d.reason},
                             {"state_size", d.state_size},
                             {"group_size", d.group_size}});
    }
    return json{{"removed_measurements", report.removed_measurements},
                {"removed_resets", report.removed_resets},
                {"introduced_static_gates", report.introduced_static_gates},
                {"synthesis_time_s", report.synthesis_time_s},
                {"decisions", decisions}};
}

std::string report_to_csv(const pcm::PassReport& report) {
    std::ostringstream os;
    os << "instr_index,is_measure,fired,reason,state_size,group_size\n";
    for (const auto& d : report.decisions) {
        os << d.instr_index << ',' << (d.is_measure ? 1 : 0) << ',' << (d.fired ? 1 : 0) << ','
           << d.reason << ',' << d.state_size << ',' << d.group_size << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_optimize(const std::string& input, const std::string& output, std::size_t n_pcm,
                 std::size_t n_max, const std::string& mode, const std::string& soundness,
                 std::uint64_t seed, const std::string& format, const std::string& report_path) {
    Circuit c = read_circuit(input);
    auto [out, report] = pcm::run_pass(c, pass_config_of(n_pcm, n_max, mode, soundness, seed));
    log(LogLevel::Info, "removed " + std::to_string(report.removed_measurements) +
                            " measurements, " + std::to_string(report.removed_resets) + " resets");
    write_circuit(output, out, format == "json" ? "json" : "dqasm");
    if (!report_path.empty()) {
        if (format == "csv") {
            write_text(report_path, report_to_csv(report));
        } else {
            write_text(report_path, report_to_json(report).dump(2) + "\n");
        }
    }
    return 0;
}

int cmd_analyze(const std::string& input, const std::string& output, std::size_t n_max,
                const std::string& soundness) {
    Circuit c = read_circuit(input);
    qcp::QcpConfig cfg;
    cfg.n_max = n_max;
    cfg.strict_reset = soundness != "paper";
    auto result = qcp::run(c, cfg);

    auto table_json = [](const qcp::AbstractState& s) {
        if (s.is_top()) return json{{"top", true}};
        json amps = json::object();
        for (const auto& [key, amp] : s.table->amps) {
            amps[std::to_string(key)] = {amp.real(), amp.imag()};
        }
        return json{{"top", false},
                    {"qubits", s.table->qubits},
                    {"state_size", qcp::state_size(*s.table)},
                    {"amps", amps}};
    };

    json sites = json::array();
    for (const auto& site : result.sites) {
        sites.push_back({{"instr_index", site.instr_index},
                         {"is_measure", site.is_measure},
                         {"qubit_pos", site.qubit_pos},
                         {"input_state", table_json(site.input_state)}});
    }
    json groups = json::array();
    for (const auto& [qubits, state] : result.final_table.groups()) {
        groups.push_back({{"qubits", qubits}, {"state", table_json(*state)}});
    }
    write_text(output, json{{"sites", sites}, {"final_groups", groups}}.dump(2) + "\n");
    return 0;
}

int cmd_simulate(const std::string& input, const std::string& output, bool enumerate_flag,
                 std::size_t shots, std::uint64_t seed) {
    Circuit c = read_circuit(input);
    OutcomeDistribution dist =
        enumerate_flag ? distribution(c) : sample(c, shots, seed);
    json j = json::object();
    for (const auto& [key, p] : dist) j[key] = p;
    write_text(output, j.dump(2) + "\n");
    return 0;
}

int cmd_gen(const std::string& out_dir, std::optional<unsigned> scale, std::size_t n_qubits,
            std::size_t depth, std::size_t count, double meas_density, double reset_density,
            std::uint64_t seed) {
    randgen::GenConfig cfg;
    cfg.scale = scale;
    cfg.n_qubits = n_qubits;
    cfg.depth = depth;
    cfg.meas_density = meas_density;
    cfg.reset_density = reset_density;
    cfg.seed = seed;
    auto circuits = randgen::generate_suite(cfg, count);

    std::filesystem::create_directories(out_dir);
    json manifest = json::array();
    for (std::size_t i = 0; i < circuits.size(); ++i) {
        std::string name = "circuit_" + std::to_string(i) + ".dqasm";
        write_text(out_dir + "/" + name, qasm::serialize(circuits[i]));
        auto counts = count_dynamic_ops(circuits[i]);
        manifest.push_back({{"file", name},
                            {"n_qubits", circuits[i].n_qubits},
                            {"n_clbits", circuits[i].n_clbits},
                            {"depth", randgen::circuit_depth(circuits[i])},
                            {"n_measurements", counts.n_measurements},
                            {"n_resets", counts.n_resets},
                            {"n_static_gates", counts.n_static_gates}});
    }
    write_text(out_dir + "/manifest.json",
               json{{"seed", seed}, {"count", count}, {"circuits", manifest}}.dump(2) + "\n");
    return 0;
}

struct BenchRow {
    unsigned scale{};
    std::size_t n_pcm{};
    long circuit = -1;  // -1 = aggregate over the suite
    std::size_t removed_meas{};
    std::size_t removed_resets{};
    double removal_pct{};
    double removal_pct_sd{};  // aggregate rows only
    std::size_t introduced_gates{};
    double synth_time_s{};
    std::size_t baseline_removed{};
};

json bench_row_json(const BenchRow& r) {
    json j{{"scale", r.scale},
           {"n_pcm", r.n_pcm},
           {"removed_meas", r.removed_meas},
           {"removed_resets", r.removed_resets},
           {"removal_pct", r.removal_pct},
           {"introduced_gates", r.introduced_gates},
           {"synth_time_s", r.synth_time_s},
           {"baseline_removed", r.baseline_removed}};
    if (r.circuit >= 0) {
        j["circuit"] = r.circuit;
    } else {
        j["circuit"] = "all";
        j["removal_pct_sd"] = r.removal_pct_sd;
    }
    return j;
}

int cmd_bench(const std::vector<unsigned>& scales, const std::vector<std::size_t>& n_pcm_list,
              std::size_t count, std::uint64_t seed, const std::string& mode,
              const std::string& soundness, const std::string& format,
              const std::string& output) {
    if (count == 0) throw CLI::ValidationError("--count must be positive");
    std::vector<BenchRow> rows;
    for (unsigned scale : scales) {
        randgen::GenConfig gcfg;
        gcfg.scale = scale;
        gcfg.seed = seed;
        auto suite = randgen::generate_suite(gcfg, count);
        for (std::size_t n_pcm : n_pcm_list) {
            // per-circuit work fans out to a pool; results are merged in suite
            // order so the aggregation stays deterministic
            std::vector<std::future<BenchRow>> futures;
            for (std::size_t i = 0; i < suite.size(); ++i) {
                futures.push_back(std::async(std::launch::async, [&, i] {
                    const Circuit& c = suite[i];
                    auto cfg = pass_config_of(n_pcm, 8, mode, soundness, seed);
                    auto [out, report] = pcm::run_pass(c, cfg);
                    auto counts = count_dynamic_ops(c);
                    std::size_t dynamic = counts.n_measurements + counts.n_resets;
                    auto [z0, base_zero] = pcm::baseline_remove_reset_in_zero(c);
                    auto [z1, base_meas] = pcm::baseline_reset_after_measure(c);
                    BenchRow row;
                    row.scale = scale;
                    row.n_pcm = n_pcm;
                    row.circuit = static_cast<long>(i);
                    row.removed_meas = report.removed_measurements;
                    row.removed_resets = report.removed_resets;
                    row.removal_pct =
                        dynamic ? 100.0 * (report.removed_measurements + report.removed_resets) /
                                      static_cast<double>(dynamic)
                                : 0.0;
                    row.introduced_gates = report.introduced_static_gates;
                    row.synth_time_s = report.synthesis_time_s;
                    row.baseline_removed = base_zero + base_meas;
                    return row;
                }));
            }
            BenchRow total;
            total.scale = scale;
            total.n_pcm = n_pcm;
            std::vector<double> pcts;
            std::vector<BenchRow> per_circuit;
            for (auto& f : futures) per_circuit.push_back(f.get());
            for (const auto& row : per_circuit) {
                total.removed_meas += row.removed_meas;
                total.removed_resets += row.removed_resets;
                total.introduced_gates += row.introduced_gates;
                total.synth_time_s += row.synth_time_s;
                total.baseline_removed += row.baseline_removed;
                pcts.push_back(row.removal_pct);
            }
            double mean = 0;
            for (double p : pcts) mean += p;
            mean /= static_cast<double>(pcts.size());
            double var = 0;
            for (double p : pcts) var += (p - mean) * (p - mean);
            total.removal_pct = mean;
            total.removal_pct_sd = std::sqrt(var / static_cast<double>(pcts.size()));
            rows.push_back(total);
            rows.insert(rows.end(), per_circuit.begin(), per_circuit.end());
        }
    }

    if (format == "csv") {
        std::ostringstream os;
        os << "scale,n_pcm,circuit,removed_meas,removed_resets,removal_pct,removal_pct_sd,"
              "introduced_gates,synth_time_s,baseline_removed\n";
        for (const auto& r : rows) {
            os << r.scale << ',' << r.n_pcm << ','
               << (r.circuit < 0 ? std::string("all") : std::to_string(r.circuit)) << ','
               << r.removed_meas << ',' << r.removed_resets << ',' << r.removal_pct << ','
               << (r.circuit < 0 ? std::to_string(r.removal_pct_sd) : std::string()) << ','
               << r.introduced_gates << ',' << r.synth_time_s << ',' << r.baseline_removed << '\n';
        }
        write_text(output, os.str());
    } else {
        json j = json::array();
        for (const auto& r : rows) j.push_back(bench_row_json(r));
        write_text(output, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_demo_bv(const std::string& secret, const std::string& out_prefix) {
    for (char ch : secret) {
        if (ch != '0' && ch != '1') throw CLI::ValidationError("secret must be a 0/1 string");
    }
    Circuit before = build_bv_reuse(secret);
    pcm::PassConfig cfg;
    cfg.n_pcm = 1;
    auto [after, report] = pcm::run_pass(before, cfg);

    auto counts = count_dynamic_ops(after);
    if (counts.n_measurements != 0 || counts.n_resets != 0) {
        throw ProcessingError("demo-bv: dynamic operations remain after optimization");
    }
    auto dist = distribution(after);
    if (dist.size() != 1 || dist.begin()->first != secret) {
        throw ProcessingError("demo-bv: optimized circuit does not reproduce the secret");
    }

    if (!out_prefix.empty()) {
        write_text(out_prefix + ".before.dqasm", qasm::serialize(before));
        write_text(out_prefix + ".after.dqasm", qasm::serialize(after));
        write_text(out_prefix + ".report.json", report_to_json(report).dump(2) + "\n");
    } else {
        std::cout << "// before\n" << qasm::serialize(before) << "// after\n"
                  << qasm::serialize(after);
        std::cout << report_to_json(report).dump(2) << "\n";
    }
    log(LogLevel::Info, "demo-bv: all " + std::to_string(report.removed_measurements) +
                            " measurements and " + std::to_string(report.removed_resets) +
                            " resets removed");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic-circuit optimization toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::size_t n_pcm = 1, n_max = 8;
    std::string mode = "conservative", soundness = "strict", format = "json";
    std::string input, output, report_path;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--format", format, "output format (json|csv|dqasm)")
            ->check(CLI::IsMember({"json", "csv", "dqasm"}));
        cmd->add_option("-o,--output", output, "output file ('-' = stdout)");
    };

    auto* optimize = app.add_subcommand("optimize", "run the measurement/reset replacement pass");
    optimize->add_option("input", input, "input .dqasm or IR .json file")->required();
    optimize->add_option("--n-pcm", n_pcm, "state-size budget");
    optimize->add_option("--n-max", n_max, "analysis group-size cap");
    optimize->add_option("--mode", mode)->check(CLI::IsMember({"faithful", "conservative"}));
    optimize->add_option("--reset-soundness", soundness)->check(CLI::IsMember({"strict", "paper"}));
    optimize->add_option("--report", report_path, "write the pass report here");
    add_common(optimize);

    auto* analyze = app.add_subcommand("analyze", "dump the static analysis as JSON");
    analyze->add_option("input", input)->required();
    analyze->add_option("--n-max", n_max);
    analyze->add_option("--reset-soundness", soundness)
        ->check(CLI::IsMember({"strict", "paper"}));
    add_common(analyze);

    bool enumerate_flag = false;
    std::size_t shots = 1024;
    auto* simulate = app.add_subcommand("simulate", "sample or enumerate a circuit");
    simulate->add_option("input", input)->required();
    simulate->add_flag("--enumerate", enumerate_flag, "exact branch enumeration");
    simulate->add_option("--shots", shots, "number of sampled shots");
    add_common(simulate);

    std::optional<unsigned> scale;
    std::size_t gen_qubits = 0, gen_depth = 0, count = 10;
    double meas_density = 0.05, reset_density = 0.03;
    auto* gen = app.add_subcommand("gen", "generate a random dynamic-circuit suite");
    gen->add_option("--scale", scale, "size recipe: scale*10 qubits, scale*200 depth");
    gen->add_option("--n-qubits", gen_qubits);
    gen->add_option("--depth", gen_depth);
    gen->add_option("--count", count);
    gen->add_option("--meas-density", meas_density);
    gen->add_option("--reset-density", reset_density);
    add_common(gen);

    std::vector<unsigned> scales{1};
    std::vector<std::size_t> n_pcm_list{1};
    auto* bench = app.add_subcommand("bench", "suite benchmark: pass vs baselines");
    bench->add_option("--scales", scales, "circuit scales")->delimiter(',');
    bench->add_option("--n-pcm-list", n_pcm_list, "n_pcm sweep")->delimiter(',');
    bench->add_option("--count", count, "circuits per scale");
    bench->add_option("--mode", mode)->check(CLI::IsMember({"faithful", "conservative"}));
    bench->add_option("--reset-soundness", soundness)->check(CLI::IsMember({"strict", "paper"}));
    add_common(bench);

    std::string secret;
    auto* demo = app.add_subcommand("demo-bv", "Bernstein-Vazirani qubit-reuse demo");
    demo->add_option("secret", secret, "secret bitstring")->required();
    add_common(demo);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (optimize->parsed()) {
            return cmd_optimize(input, output, n_pcm, n_max, mode, soundness, seed,
                                format, report_path);
        }
        if (analyze->parsed()) return cmd_analyze(input, output, n_max, soundness);
        if (simulate->parsed()) return cmd_simulate(input, output, enumerate_flag, shots, seed);
        if (gen->parsed()) {
            return cmd_gen(output.empty() ? "." : output, scale, gen_qubits, gen_depth, count,
                           meas_density, reset_density, seed);
        }
        if (bench->parsed()) {
            return cmd_bench(scales, n_pcm_list, count, seed, mode, soundness, format, output);
        }
        if (demo->parsed()) return cmd_demo_bv(secret, output);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
