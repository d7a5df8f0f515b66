#include <cmath>

#include <gtest/gtest.h>

#include "blowup/experiment.hpp"

using namespace blowup;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("blowup_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json small_config()
{
    return {{"nl", "power:3"},
            {"domain", {{"type", "interval"}, {"a", 0}, {"b", 1}}},
            {"grid", {{"h", 1.0 / 64}}},
            {"time", {{"T", 0.25}, {"dt", 1.0 / 64}}},
            {"elliptic", "maximal"},
            {"parabolic", "maximal"},
            {"checks", {"B14", "B15", "B18"}}};
}

ErrorCode config_code(const json& j)
{
    try {
        ExperimentConfig::from_json(j);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

std::map<std::string, std::string> tree(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
    return out;
}

} // namespace

TEST(Io, RealsRoundTripExactly)
{
    for (double v : {0.0, -0.0, 1.0 / 3, 1e-300, 6.02214076e23, M_PI, kInf, -kInf})
        EXPECT_EQ(parse_real(format_real(v)), v) << format_real(v);
    EXPECT_TRUE(std::isnan(parse_real(format_real(kNaN))));
}

TEST(Io, HashIgnoresKeyOrder)
{
    const json a = json::parse(R"({"x": 1, "y": [1, 2], "z": {"p": 0.5, "q": "s"}})");
    const json b = json::parse(R"({"z": {"q": "s", "p": 0.5}, "y": [1, 2], "x": 1})");
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash(json::parse(R"({"x": 2, "y": [1, 2], "z": {"p": 0.5, "q": "s"}})")));
    EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Io, FieldCsvRoundTrip)
{
    auto d = share(make_domain(named_domain_descriptor("l_shape", 1.0 / 8)));
    auto w = solve_dirichlet(d, Nonlinearity::power(3), 5.0);
    std::stringstream ss;
    write_field_csv(ss, w);
    auto back = read_field_csv(ss, w);
    for (int idx = 0; idx < d->size(); ++idx) {
        if (d->inside(idx)) {
            EXPECT_EQ(back.values[idx], w.values[idx]);
        } else {
            EXPECT_TRUE(std::isnan(back.values[idx]));
        }
    }
    const json side = field_sidecar(w, Nonlinearity::power(3));
    EXPECT_EQ(side["k"].get<double>(), 5.0);
    EXPECT_EQ(side["h"].get<double>(), 1.0 / 8);
    EXPECT_EQ(side["domain"], d->descriptor);
}

TEST(Io, BinarySeriesRoundTrip)
{
    auto d = share(make_domain(named_domain_descriptor("disk", 1.0 / 8)));
    auto u = solve_parabolic(d, 0.5, 1.0 / 8, Nonlinearity::power(3), 4.0);
    std::stringstream ss;
    write_series_binary(ss, u);
    const auto b = read_series_binary(ss);
    EXPECT_EQ(b.nx, d->nx);
    EXPECT_EQ(b.ny, d->ny);
    ASSERT_EQ(b.slices.size(), static_cast<size_t>(u.size()));
    EXPECT_EQ(b.times, u.times);
    for (int m = 0; m < u.size(); ++m)
        for (int idx = 0; idx < d->size(); ++idx)
            if (d->inside(idx)) { EXPECT_EQ(b.slices[m][idx], u[m][idx]); }
    std::stringstream junk("not a series");
    EXPECT_THROW(read_series_binary(junk), Error);
}

TEST(Config, Validation)
{
    EXPECT_NO_THROW(ExperimentConfig::from_json(small_config()));
    auto j = small_config();
    j["time"]["dt"] = 0.0;
    EXPECT_EQ(config_code(j), ErrorCode::ConfigInvalid);
    j = small_config();
    j["time"]["dt"] = -1.0;
    EXPECT_EQ(config_code(j), ErrorCode::ConfigInvalid);
    j = small_config();
    j["time"]["dt"] = 0.5;  // above h
    EXPECT_EQ(config_code(j), ErrorCode::ConfigInvalid);
    j = small_config();
    j["grid"]["h"] = 0.0;
    EXPECT_EQ(config_code(j), ErrorCode::ConfigInvalid);
    j = small_config();
    j["colour"] = "red";
    EXPECT_EQ(config_code(j), ErrorCode::ConfigInvalid);
    j = small_config();
    j["checks"] = {"B99"};
    EXPECT_EQ(config_code(j), ErrorCode::ConfigInvalid);
    j = small_config();
    j["nl"] = "power";
    EXPECT_EQ(config_code(j), ErrorCode::ConfigInvalid);
    j = small_config();
    j["domain"] = {{"type", "hexagon"}};
    EXPECT_EQ(config_code(j), ErrorCode::ConfigInvalid);
    j = small_config();
    j.erase("time");
    EXPECT_EQ(config_code(j), ErrorCode::ConfigInvalid);  // parabolic without time
}

TEST(Config, RoundTrip)
{
    const auto c = ExperimentConfig::from_json(small_config());
    const auto again = ExperimentConfig::from_json(c.to_json());
    EXPECT_EQ(again.to_json(), c.to_json());
    EXPECT_EQ(again.hash(), c.hash());
    auto moved = c.to_json();
    moved["output"] = "elsewhere";
    EXPECT_EQ(ExperimentConfig::from_json(moved).hash(), c.hash());
}

TEST(Run, DeterministicAndReproducible)
{
    const auto c = ExperimentConfig::from_json(small_config());
    std::ostringstream log;
    const auto r1 = run_experiment(c, scratch("a"), log);
    const auto r2 = run_experiment(c, scratch("b"), log);
    ASSERT_EQ(r1.exit_code, 0) << r1.error << log.str();
    ASSERT_EQ(r2.exit_code, 0);
    EXPECT_EQ(r1.dir.filename(), r2.dir.filename());
    const auto t1 = tree(r1.dir), t2 = tree(r2.dir);
    EXPECT_EQ(t1, t2);
    EXPECT_TRUE(t1.count("w.csv"));
    EXPECT_TRUE(t1.count("u/u_index.json"));
    EXPECT_TRUE(t1.count("mask.pgm"));
    EXPECT_TRUE(t1.count("reports.json"));

    // the emitted config reproduces the run
    const auto c3 = load_config(r1.dir / "config.json");
    const auto r3 = run_experiment(c3, scratch("c"), log);
    EXPECT_EQ(r3.dir.filename(), r1.dir.filename());
    EXPECT_EQ(tree(r3.dir), t1);
}

TEST(Run, WrongLadderFailsTheCheck)
{
    auto j = small_config();
    j["elliptic"] = {{"k", 8}};
    j["parabolic"] = {{"k", 8}};
    j["checks"] = {"B10", "B18"};
    std::ostringstream log;
    const auto r = run_experiment(ExperimentConfig::from_json(j), scratch("wrong"), log);
    EXPECT_EQ(r.exit_code, 1);
    ASSERT_EQ(r.reports.size(), 2u);
    EXPECT_TRUE(r.reports[0]["holds"].get<bool>());
    EXPECT_FALSE(r.reports[1]["holds"].get<bool>());
    EXPECT_EQ(r.reports[1]["error"], "WrongLadder");
    const json saved = json::parse(read_file(r.dir / "reports.json"));
    EXPECT_EQ(saved[1]["error"], "WrongLadder");
}

TEST(Run, PipelineErrorIsExitThree)
{
    auto j = small_config();
    j["nl"] = "linear:1";  // no maximal solution: the ladder does not settle
    j["parabolic"] = "none";
    j["checks"] = json::array();
    std::ostringstream log;
    const auto r = run_experiment(ExperimentConfig::from_json(j), scratch("linear"), log);
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_NE(r.error.find("LadderNotConverged"), std::string::npos) << r.error;
}

TEST(Run, BinarySeriesOption)
{
    auto j = small_config();
    j["binary_series"] = true;
    j["checks"] = json::array();
    j["emit_plot_data"] = true;
    std::ostringstream log;
    const auto r = run_experiment(ExperimentConfig::from_json(j), scratch("bin"), log);
    ASSERT_EQ(r.exit_code, 0) << r.error;
    EXPECT_TRUE(fs::exists(r.dir / "u" / "u.bin"));
    EXPECT_FALSE(fs::exists(r.dir / "u" / "u_0000.csv"));
    EXPECT_TRUE(fs::exists(r.dir / "plot" / "u_t.csv"));
    std::ifstream is(r.dir / "u" / "u.bin", std::ios::binary);
    EXPECT_EQ(read_series_binary(is).times.size(), 17u);
}
