// Step through the 2-qubit Grover pipeline segment by segment and print what
// the client holds at every boundary.
#include <cstdio>

#include "pbqc/grover.hpp"
#include "pbqc/resources.hpp"

int main() {
    using namespace pbqc;
    const auto spec = grover2_spec();
    std::printf("%s\n", spec.to_text().c_str());

    auto probe = [](int seg, const StateVector &reg, const std::vector<qotp::PadKey> &keys) {
        auto plain = decrypt_register(reg, keys);
        std::printf("after segment %d  keys:", seg);
        for (const auto &k : keys) std::printf(" (%d,%d)", k.a, k.b);
        std::printf("\n");
        for (std::uint64_t i = 0; i < plain.dimension(); ++i) {
            auto a = plain.amplitude(i);
            std::printf("  |%s>  %+.4f %+.4fi\n", outcome_label(i, 2).c_str(), a.real(), a.imag());
        }
    };
    auto res = run_pipeline(spec, StateVector(2), 7, {}, probe);

    for (const auto &t : res.transcripts)
        std::printf("%s transcript: %zu messages (n=%d, m=%d)\n", t.segment.c_str(), t.messages.size(), t.n, t.m);
    for (auto m : {Mode::full_ubqc, Mode::pbqc}) std::printf("%s", resource_report(spec, m).to_text().c_str());
}
