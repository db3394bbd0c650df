// Copyright 2026 The qmean Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "qmean/fixtures.hpp"
#include "qmean/io.hpp"

namespace {

namespace fs = std::filesystem;
using qmean::ConfigError;
using qmean::FunctionSpec;
using qmean::io::Json;

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("qmean_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string config_error_message(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

TEST(JsonTextTest, MalformedInputReportsLineAndColumn) {
    std::string msg = config_error_message([] { qmean::io::parse_json_text("{\n  \"a\": 1,\n  \"b\": ]\n}", "cfg.json"); });
    EXPECT_NE(msg.find("cfg.json: malformed JSON at line 3, column"), std::string::npos) << msg;
}

TEST(JsonTextTest, MissingFileIsConfigError) {
    EXPECT_THROW(qmean::io::read_json_file("/nonexistent/qmean/config.json"), ConfigError);
}

TEST(MatrixJsonTest, RoundTripComplex) {
    qmean::Rng rng(701);
    auto m = qmean::fixtures::ginibre(4, rng);
    Json j = qmean::io::matrix_to_json(m);
    EXPECT_EQ(j.at("dim"), 4);
    auto back = qmean::io::matrix_from_json(Json::parse(j.dump()), "m");
    EXPECT_EQ(back, m);
}

TEST(MatrixJsonTest, ImaginaryPartIsOptional) {
    auto m = qmean::io::matrix_from_json(Json::parse(R"({"dim": 2, "re": [[1, 2], [3, 4]]})"), "m");
    EXPECT_EQ(m(1, 0), qmean::Complex(3.0, 0.0));
}

TEST(MatrixJsonTest, ShapeErrorsAreConfigErrors) {
    EXPECT_THROW(qmean::io::matrix_from_json(Json::parse(R"({"dim": 3, "re": [[1, 2], [3, 4]]})"), "m"), ConfigError);
    EXPECT_THROW(qmean::io::matrix_from_json(Json::parse(R"({"dim": 2, "re": [[1, 2], [3]]})"), "m"), ConfigError);
    EXPECT_THROW(qmean::io::matrix_from_json(Json::parse(R"({"dim": 2, "re": [[1, "x"], [3, 4]]})"), "m"),
                 ConfigError);
}

TEST(MatrixJsonTest, PathIsRelativeToConfigDirectory) {
    fs::path dir = scratch_dir("matrix_path");
    std::ofstream(dir / "h.json") << R"({"dim": 2, "re": [[0, 1], [1, 0]]})";
    auto m = qmean::io::matrix_from_json_or_path(Json("h.json"), dir, "H");
    EXPECT_EQ(m(0, 1), qmean::Complex(1.0, 0.0));
    EXPECT_THROW(qmean::io::matrix_from_json_or_path(Json("missing.json"), dir, "H"), ConfigError);
}

TEST(FunctionSpecJsonTest, RoundTripEveryFamily) {
    std::vector<FunctionSpec> specs{FunctionSpec::identity(), FunctionSpec::exponential(0.7),
                                    FunctionSpec::weighted_exponential({1.0, -2.0, 0.5}, 1.1),
                                    FunctionSpec::tabulated({0.0, 1.0, 2.5}, {0.3, 0.9, 0.1})};
    for (const auto& f : specs) {
        auto back = qmean::io::function_spec_from_json(Json::parse(qmean::io::function_spec_to_json(f).dump()), "f");
        EXPECT_EQ(back.family(), f.family());
        for (double xi : {0.0, 0.4, 1.7, 3.0}) EXPECT_EQ(back(xi), f(xi));
    }
}

TEST(FunctionSpecJsonTest, ExternalSchema) {
    auto f = qmean::io::function_spec_from_json(
        Json::parse(R"({"family": "weighted_exponential", "beta": 1.0, "g_coeffs": [0, 1]})"), "f");
    EXPECT_NEAR(f(2.0), 2.0 * std::exp(-2.0), 1e-15);
    EXPECT_THROW(qmean::io::function_spec_from_json(Json::parse(R"({"family": "sine"})"), "f"), ConfigError);
    EXPECT_THROW(qmean::io::function_spec_from_json(Json::parse(R"({"family": "exponential", "beta": -1})"), "f"),
                 ConfigError);
}

TEST(StateJsonTest, RoundTrip) {
    qmean::Rng rng(702);
    qmean::ComplexVector amps(16);
    for (Eigen::Index i = 0; i < amps.size(); ++i) amps(i) = qmean::Complex(qmean::uniform01(rng), qmean::uniform01(rng));
    amps.normalize();
    qmean::StateVector s(2, 1, amps);
    Json j = qmean::io::state_to_json(s);
    EXPECT_EQ(j.at("n_probe"), 2);
    EXPECT_EQ(j.at("n_main"), 1);
    auto back = qmean::io::state_from_json(Json::parse(j.dump()));
    EXPECT_EQ(back.amplitudes(), s.amplitudes());
    j["re"].erase(0);
    j["im"].erase(0);
    EXPECT_THROW(qmean::io::state_from_json(j), ConfigError);
}

TEST(DistributionJsonTest, CountsKeyedByRegisterValues) {
    std::vector<qmean::SampleRecord> samples{{1, 0, 0}, {1, 0, 0}, {3, 1, 1}};
    auto d = qmean::empirical_distribution(samples, qmean::Marginal{true, true, true});
    Json j = qmean::io::distribution_to_json(d);
    EXPECT_EQ(j.at("total"), 3);
    EXPECT_EQ(j.at("counts").at("1,0,0"), 2);
    EXPECT_EQ(j.at("counts").at("3,1,1"), 1);
}

TEST(ChainJsonTest, RoundTrip) {
    qmean::Rng rng(703);
    auto chain = qmean::fixtures::random_weighted_graph_chain(5, rng);
    auto back = qmean::io::chain_from_json(Json::parse(qmean::io::chain_to_json(chain).dump()), "chain");
    EXPECT_EQ(back.transition(), chain.transition());
    ASSERT_TRUE(back.stationary().has_value());
    EXPECT_EQ(*back.stationary(), *chain.stationary());
}

TEST(ChainJsonTest, BadRowsAreConfigErrors) {
    EXPECT_THROW(qmean::io::chain_from_json(Json::parse(R"({"transition": [[0.5, 0.6], [0.5, 0.5]]})"), "chain"),
                 ConfigError);
}

TEST(ScenarioJsonTest, AutoAndNumbers) {
    Json j = Json::parse(R"({"kind": "B", "beta": 0.5, "H": {"dim": 2, "re": [[0, 0], [0, 1]]},
        "observable": {"eigenvalues": [0, 1]}, "n_probe": 3, "dt": "auto", "gamma": 0.5, "n_sam": 123,
        "seed": 9, "proposal": "uniform", "burn_in": 7, "thinning": 2})");
    auto spec = qmean::io::scenario_from_json(j, ".");
    EXPECT_EQ(spec.kind, qmean::ScenarioKind::B);
    EXPECT_EQ(spec.beta, 0.5);
    EXPECT_EQ(spec.circuit.n_probe, 3);
    EXPECT_FALSE(spec.circuit.dt.has_value());
    EXPECT_EQ(spec.circuit.gamma, 0.5);
    EXPECT_EQ(spec.n_sam, 123u);
    EXPECT_EQ(spec.chain.seed, 9u);
    EXPECT_EQ(spec.chain.proposal, qmean::Proposal::Uniform);
    EXPECT_EQ(spec.chain.burn_in, 7u);
    EXPECT_EQ(spec.chain.thinning, 2u);
}

TEST(ScenarioJsonTest, InvalidFieldsAreConfigErrors) {
    const std::string base = R"("H": {"dim": 2, "re": [[0, 0], [0, 1]]}, "observable": {"eigenvalues": [0, 1]})";
    for (const std::string extra : {R"("kind": "D")", R"("kind": "B", "dt": "soon")", R"("kind": "B", "beta": -1)",
                                    R"("kind": "B", "proposal": "gibbs")", R"("kind": "B", "n_sam": "many")",
                                    R"("kind": "C")", R"("kind": "B", "mode": "fast")"}) {
        Json j = Json::parse("{" + extra + ", " + base + "}");
        EXPECT_THROW(qmean::io::scenario_from_json(j, "."), ConfigError) << extra;
    }
    EXPECT_THROW(qmean::io::scenario_from_json(Json::parse(R"({"kind": "B"})"), "."), ConfigError);
    Json non_hermitian = Json::parse(R"({"kind": "B", "H": {"dim": 2, "re": [[0, 1], [0, 1]]},
        "observable": {"eigenvalues": [0, 1]}})");
    EXPECT_THROW(qmean::io::scenario_from_json(non_hermitian, "."), ConfigError);
}

TEST(ReportJsonTest, Fields) {
    qmean::EstimateReport r{0.25, 0.01, 100, qmean::MuMode::Circuit, {{"acceptance_rate", 0.5}}};
    Json j = qmean::io::report_to_json(r);
    EXPECT_EQ(j.at("point_estimate"), 0.25);
    EXPECT_EQ(j.at("standard_error"), 0.01);
    EXPECT_EQ(j.at("n_sam"), 100);
    EXPECT_EQ(j.at("mode"), "circuit-mu");
    EXPECT_EQ(j.at("diagnostics").at("acceptance_rate"), 0.5);
}

TEST(ManifestJsonTest, Fields) {
    qmean::io::RunManifest m{"mean", "c.json", 42, "out.json", "2026-01-01T00:00:00Z"};
    Json j = qmean::io::manifest_to_json(m);
    for (const char* key : {"command", "config_path", "seed", "output_path", "timestamp", "tool_version"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j.at("seed"), 42);
    EXPECT_EQ(j.at("tool_version"), qmean::io::kToolVersion);
}

}  // namespace
