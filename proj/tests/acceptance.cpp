// One line per acceptance criterion. Exit status is nonzero if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "pbqc/grover.hpp"
#include "pbqc/resources.hpp"
#include "pbqc/verify.hpp"

using namespace pbqc;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char *title, double time_limit_s, const std::function<Outcome()> &body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o = body();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs < time_limit_s;
    bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %d. %s  (%.3f s, limit %.0f s)%s%s\n", pass ? "PASS" : "FAIL", id, title, secs, time_limit_s,
                o.detail.empty() ? "" : "  ", o.detail.c_str());
    if (!in_time) std::printf("       over the time limit\n");
}

std::string dev_text(const verify::PropertyResult &r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: cases=%llu max_dev=%.3e", r.name.c_str(),
                  static_cast<unsigned long long>(r.enumeration), r.max_deviation);
    return buf;
}

Outcome within(std::initializer_list<std::pair<verify::PropertyResult, double>> parts) {
    Outcome o{true, {}};
    for (const auto &[r, tol] : parts) {
        bool ok = r.pass && r.max_deviation <= tol;
        o.pass = o.pass && ok;
        if (!o.detail.empty()) o.detail += "; ";
        o.detail += dev_text(r);
        if (!ok && !r.detail.empty()) o.detail += " (" + r.detail + ")";
    }
    return o;
}

}  // namespace

int main() {
    criterion(1, "Grover demo yields 11 with certainty", 10, [] {
        const std::uint64_t seeds[] = {0, 1, 7, 42, kSeed};
        const std::uint64_t target = 0b11;
        double worst_fid = 1.0;
        int worst_hits = 1024;
        std::string where;
        StateVector probe(2);
        for (auto seed : seeds) {
            auto demo = grover2_demo(seed, 1024);
            double fid = fidelity_up_to_phase(demo.final_state, StateVector::basis(2, target));
            int hits = demo.histogram.at("11");
            worst_fid = std::min(worst_fid, fid);
            worst_hits = std::min(worst_hits, hits);
            probe = demo.final_state;
        }
        Outcome o;
        o.pass = worst_fid >= 1.0 - 1e-9 && worst_hits == 1024;
        char buf[200];
        std::snprintf(buf, sizeof buf, "min fidelity to |11> = %.3e, min count of 11 = %d/1024", worst_fid, worst_hits);
        o.detail = buf;
        if (!o.pass) {
            std::string peak;
            double best = 0;
            for (std::uint64_t i = 0; i < 4; ++i) {
                if (std::norm(probe.amplitude(i)) > best) {
                    best = std::norm(probe.amplitude(i));
                    peak = outcome_label(i, 2);
                }
            }
            std::snprintf(buf, sizeof buf, "\n       info: decrypted output concentrates on %s with probability %.12f",
                          peak.c_str(), best);
            o.detail += buf;
        }
        return o;
    });

    criterion(2, "Grover resource counts (18, 9, N/A) and (12, 5, 6)", 1, [] {
        auto spec = grover2_spec();
        auto full = resource_report(spec, Mode::full_ubqc);
        auto part = resource_report(spec, Mode::pbqc);
        Outcome o;
        o.pass = full.cluster_qubits == 18 && full.measurement_depth == 9 && !full.circuit_depth &&
                 part.cluster_qubits == 12 && part.measurement_depth == 5 && part.circuit_depth == 6;
        o.detail = full.to_json().dump() + " " + part.to_json().dump();
        return o;
    });

    criterion(3, "Clifford key updates commute with every Clifford rule", 5, [] {
        return within({{verify::clifford_key_commutation(derive_seed(kSeed, "c3")), 1e-10}});
    });

    criterion(4, "T gadget decrypts to T|psi> and c is unbiased", 60, [] {
        return within({{verify::t_gadget_exhaustive(derive_seed(kSeed, "c4")), 1e-9},
                       {verify::t_gadget_unbiased(derive_seed(kSeed, "c4")), 1e-10}});
    });

    criterion(5, "Blind protocol output matches plaintext over 50 seeds per gate", 60, [] {
        return within({{verify::protocol_correctness(derive_seed(kSeed, "c5"), 50), 1e-9}});
    });

    criterion(6, "delta uniform on Z_8 and transcripts indistinguishable", 60, [] {
        std::map<int, int> hist;
        auto d = verify::delta_uniformity(derive_seed(kSeed, "c6"), &hist);
        auto t = verify::transcript_indistinguishability(derive_seed(kSeed, "c6"));
        Outcome o = within({{d, 0.0}, {t, 0.0}});
        bool flat = hist.size() == 8;
        for (const auto &[_, c] : hist) flat = flat && c == 2;
        o.pass = o.pass && flat;
        return o;
    });

    criterion(7, "server-received qubits and padded outputs maximally mixed", 60, [] {
        return within({{verify::server_view_mixedness(derive_seed(kSeed, "c7")), 1e-10},
                       {verify::output_padding(derive_seed(kSeed, "c7")), 1e-10}});
    });

    criterion(8, "30 random segmented specs compose correctly", 60, [] {
        return within({{verify::pipeline_composition(derive_seed(kSeed, "c8"), 30), 1e-9}});
    });

    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
