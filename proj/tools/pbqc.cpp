#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pbqc/grover.hpp"
#include "pbqc/pipeline.hpp"
#include "pbqc/resources.hpp"
#include "pbqc/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct RunConfig {
    std::uint64_t seed = 0;
    int shots = 1024;
    std::string spec_path;
    std::string out_dir = "pbqc_out";
    std::string mode = "pbqc";
    bool inject_fault = false;
};

void write_file(const fs::path &p, const std::string &text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed: " + p.string());
}

double tidy(double v) {
    double r = std::round(v * 1e12) / 1e12;
    return r == 0.0 ? 0.0 : r;
}

json histogram_json(const std::map<std::string, int> &h, std::uint64_t seed, int shots) {
    json j;
    j["seed"] = seed;
    j["shots"] = shots;
    j["counts"] = json::object();
    for (const auto &[k, v] : h) j["counts"][k] = v;
    return j;
}

json state_json(const pbqc::StateVector &s) {
    json j;
    j["qubits"] = s.num_qubits();
    j["amplitudes"] = json::array();
    for (std::uint64_t i = 0; i < s.dimension(); ++i) {
        auto a = s.amplitude(i);
        j["amplitudes"].push_back(
            {{"label", pbqc::outcome_label(i, s.num_qubits())}, {"re", tidy(a.real())}, {"im", tidy(a.imag())}});
    }
    return j;
}

json key_history_json(const std::vector<pbqc::KeySnapshot> &hist) {
    json j = json::array();
    for (const auto &snap : hist) {
        json keys = json::array();
        for (const auto &k : snap.keys) keys.push_back({k.a, k.b});
        j.push_back({{"after", snap.label}, {"keys", keys}});
    }
    return j;
}

void write_transcripts(const fs::path &dir, const std::vector<pbqc::protocol::Transcript> &ts) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
        write_file(dir / ("transcript_" + std::to_string(i) + "_" + ts[i].segment + ".jsonl"), ts[i].to_jsonl());
    }
}

void write_reports(const fs::path &dir, const pbqc::CircuitSpec &spec) {
    for (auto m : {pbqc::Mode::full_ubqc, pbqc::Mode::pbqc}) {
        auto r = pbqc::resource_report(spec, m);
        write_file(dir / (std::string("report_") + pbqc::mode_name(m) + ".json"), r.to_json().dump(2) + "\n");
        write_file(dir / (std::string("report_") + pbqc::mode_name(m) + ".txt"), r.to_text());
    }
}

void print_histogram(const std::map<std::string, int> &h) {
    for (const auto &[k, v] : h) std::cout << k << " " << v << "\n";
}

int cmd_grover(const RunConfig &cfg) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    auto demo = pbqc::grover2_demo(cfg.seed, cfg.shots);
    write_file(dir / "histogram.json", histogram_json(demo.histogram, cfg.seed, cfg.shots).dump(2) + "\n");
    write_reports(dir, pbqc::grover2_spec());
    write_transcripts(dir, demo.pipeline.transcripts);
    print_histogram(demo.histogram);
    std::cout << pbqc::resource_report(pbqc::grover2_spec(), pbqc::parse_mode(cfg.mode)).to_text();
    return 0;
}

int cmd_run(const RunConfig &cfg, bool sample) {
    std::ifstream in(cfg.spec_path);
    if (!in) throw std::runtime_error("cannot read spec " + cfg.spec_path);
    std::stringstream buf;
    buf << in.rdbuf();
    pbqc::CircuitSpec spec = pbqc::parse_circuit_spec(buf.str());
    auto mode = pbqc::parse_mode(cfg.mode);

    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    auto res = pbqc::run_pipeline(spec, pbqc::StateVector(spec.num_qubits), cfg.seed);
    auto report = pbqc::resource_report(spec, mode);
    const json amps = state_json(res.final_state);
    write_file(dir / "final_state.json", amps.dump(2) + "\n");
    write_file(dir / "keys.json", key_history_json(res.key_history).dump(2) + "\n");
    write_file(dir / "report.json", report.to_json().dump(2) + "\n");
    write_file(dir / "report.txt", report.to_text());
    write_transcripts(dir, res.transcripts);
    for (const auto &a : amps["amplitudes"]) {
        std::cout << a["label"].get<std::string>() << " " << a["re"].get<double>() << " " << a["im"].get<double>()
                  << "\n";
    }
    std::cout << report.to_text();
    if (sample) {
        pbqc::Rng shot_rng(cfg.seed, "client/shots");
        auto hist = pbqc::sample_histogram(res.final_state, cfg.shots, shot_rng);
        write_file(dir / "histogram.json", histogram_json(hist, cfg.seed, cfg.shots).dump(2) + "\n");
        print_histogram(hist);
    }
    return 0;
}

int cmd_verify(const RunConfig &cfg) {
    auto results = pbqc::verify::run_all({cfg.seed, cfg.inject_fault});
    json report = json::array();
    bool ok = true;
    for (const auto &r : results) {
        std::printf("%-4s %-16s %-44s cases=%-6llu max_dev=%.3e%s%s\n", r.pass ? "PASS" : "FAIL", r.module.c_str(),
                    r.name.c_str(), static_cast<unsigned long long>(r.enumeration), r.max_deviation,
                    r.detail.empty() ? "" : "  ", r.detail.c_str());
        if (!r.pass) {
            ok = false;
            std::printf("     replay seed %llu\n", static_cast<unsigned long long>(r.replay_seed));
        }
        report.push_back({{"property", r.name},
                          {"module", r.module},
                          {"enumeration", r.enumeration},
                          {"max_deviation", r.max_deviation},
                          {"pass", r.pass},
                          {"replay_seed", r.replay_seed},
                          {"detail", r.detail}});
    }
    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        write_file(fs::path(cfg.out_dir) / "verify_report.json", report.dump(2) + "\n");
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Partial blind quantum computation simulator"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--seed", cfg.seed, "global seed");
        sub->add_option("--out-dir", cfg.out_dir, "directory for output files");
        sub->add_option("--mode", cfg.mode, "resource report mode")->check(CLI::IsMember({"full_ubqc", "pbqc"}));
    };

    auto *grover = app.add_subcommand("grover", "2-qubit Grover demo through the PBQC pipeline");
    add_common(grover);
    grover->add_option("--shots", cfg.shots, "measurement shots")->check(CLI::PositiveNumber);

    auto *verify = app.add_subcommand("verify", "run every property suite");
    add_common(verify);
    verify->add_flag("--inject-fault", cfg.inject_fault, "break the S key rule (test only)")->group("");

    auto *run = app.add_subcommand("run", "run a segmented circuit spec");
    add_common(run);
    run->add_option("--spec", cfg.spec_path, "circuit spec file")->required();
    auto *shots_opt = run->add_option("--shots", cfg.shots, "also sample this many shots")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);
    try {
        if (grover->parsed()) return cmd_grover(cfg);
        if (verify->parsed()) {
            if (verify->count("--out-dir") == 0) cfg.out_dir.clear();
            return cmd_verify(cfg);
        }
        return cmd_run(cfg, shots_opt->count() > 0);
    } catch (const pbqc::ParseError &e) {
        std::cerr << "parse error: " << e.what() << "\n";
    } catch (const pbqc::CapacityError &e) {
        std::cerr << "capacity error: " << e.what() << "\n";
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return 2;
}
