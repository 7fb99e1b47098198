#include <gtest/gtest.h>

#include "pbqc/grover.hpp"
#include "pbqc/resources.hpp"

using namespace pbqc;

TEST(ResourceReport, GroverFullUbqc) {
    auto r = resource_report(grover2_spec(), Mode::full_ubqc);
    EXPECT_EQ(r.cluster_qubits, 18);
    EXPECT_EQ(r.measurement_depth, 9);
    EXPECT_FALSE(r.circuit_depth.has_value());
    EXPECT_EQ(r.to_json().dump(), R"({"mode":"full_ubqc","cluster_qubits":18,"measurement_depth":9,"circuit_depth":null})");
    EXPECT_NE(r.to_text().find("circuit_depth: N/A"), std::string::npos);
}

TEST(ResourceReport, GroverPbqc) {
    auto r = resource_report(grover2_spec(), Mode::pbqc);
    EXPECT_EQ(r.cluster_qubits, 12);
    EXPECT_EQ(r.measurement_depth, 5);
    ASSERT_TRUE(r.circuit_depth.has_value());
    EXPECT_EQ(*r.circuit_depth, 6);
}

TEST(ResourceReport, MatchesPipelineTally) {
    auto res = run_pipeline(grover2_spec(), StateVector(2), 3);
    EXPECT_EQ(res.report, resource_report(grover2_spec(), Mode::pbqc));
}

TEST(ResourceReport, EmptySensitiveSegment) {
    CircuitSpec spec;
    spec.num_qubits = 2;
    spec.segments = {{SegmentTag::public_segment, {{Gate::h(), {0}}, {Gate::cz(), {0, 1}}}},
                     {SegmentTag::sensitive_segment, {}}};
    auto r = resource_report(spec, Mode::pbqc);
    EXPECT_EQ(r.cluster_qubits, 0);
    EXPECT_EQ(r.measurement_depth, 0);
    EXPECT_EQ(r.circuit_depth, asap_depth(2, spec.all_gates()) + 1);
}

TEST(ResourceReport, ModeNames) {
    EXPECT_EQ(parse_mode("full_ubqc"), Mode::full_ubqc);
    EXPECT_EQ(parse_mode("pbqc"), Mode::pbqc);
    EXPECT_THROW(parse_mode("ubqc"), std::invalid_argument);
}

TEST(AsapDepth, ParallelLayers) {
    EXPECT_EQ(asap_depth(2, {{Gate::h(), {0}}, {Gate::h(), {1}}}), 1);
    EXPECT_EQ(asap_depth(2, {{Gate::h(), {0}}, {Gate::cz(), {0, 1}}, {Gate::h(), {1}}}), 3);
    EXPECT_EQ(asap_depth(3, {}), 0);
}

TEST(AsymptoticCosts, PbqcCommunication) {
    ResourceParams p;
    p.n = 2;
    p.s = 3;
    p.p = 4;
    p.d = 7;
    p.tau = 0;
    auto c = asymptotic_costs(p, CostRow::pbqc);
    EXPECT_EQ(c.communication.value, 6.0);
    EXPECT_EQ(c.server_qubits.value, 6.0);
    EXPECT_EQ(c.meas_depth.value, 3.0);
    EXPECT_EQ(c.circuit_depth.value, 4.0);
}

TEST(AsymptoticCosts, Bfk09ServerQubits) {
    ResourceParams p;
    p.n = 2;
    p.d = 9;
    p.s = 9;
    auto c = asymptotic_costs(p, CostRow::bfk09);
    EXPECT_EQ(c.server_qubits.value, 18.0);
    EXPECT_EQ(c.meas_depth.value, 9.0);
    EXPECT_FALSE(c.circuit_depth.value.has_value());
}

TEST(AsymptoticCosts, FullBlindingReducesToBfk09) {
    for (int n = 1; n <= 8; ++n) {
        for (int d = 0; d <= 12; ++d) {
            ResourceParams p;
            p.n = n;
            p.d = d;
            p.s = d;
            EXPECT_TRUE(asymptotic_costs(p, CostRow::pbqc).same_counts(asymptotic_costs(p, CostRow::bfk09)));
        }
    }
}

TEST(AsymptoticCosts, ParameterValidation) {
    ResourceParams p;
    p.n = 2;
    p.d = 5;
    p.s = 2;
    p.p = 2;
    EXPECT_THROW(asymptotic_costs(p, CostRow::pbqc), std::invalid_argument);
    p.p = 3;
    EXPECT_THROW(asymptotic_costs(p, CostRow::succinct), std::invalid_argument);
    p.kappa = 128;
    p.poly_kappa = 4;
    EXPECT_EQ(asymptotic_costs(p, CostRow::succinct).client_qubits.value, 128.0);
    EXPECT_THROW(asymptotic_costs(p, CostRow::sbqc), std::invalid_argument);
}
