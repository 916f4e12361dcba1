#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include "cmimp/sweep_io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace cmimp;

namespace {

struct Result {
    int code;
    std::string output;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(CMIMP_CLI_PATH) + " " + args + " 2>&1";
    Result r{-1, {}};
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.output.append(buf.data(), n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("cmimp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }
    std::string write(const std::string& name, const std::string& text) const {
        write_file_atomic(dir / name, text);
        return path(name);
    }
    std::string model_file(const CircuitModel& m, const std::string& name = "model.json") const {
        return write(name, write_model(m));
    }

    fs::path dir;
};

CircuitModel transparent_model() {
    CircuitModel m;
    m.lisn_cable.z_cm_lisn = impedance_model::Constant{0.0};
    m.lisn_cable.z_cm_cable = impedance_model::Constant{0.0};
    return m;
}

std::string csv_of(const ImpedanceSweep& z) { return write_impedance_csv(z); }

}  // namespace

TEST_F(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("extract --gamma x").code, 1);
}

TEST_F(Cli, CharacterizeMatchesNetworkCalibration) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 5; ++t) {
        auto m = oracle::random_model(rng);
        auto model = model_file(m);
        auto r = run("simulate --model " + model + " -t osl --digits 17 -o " + path("std"));
        ASSERT_EQ(r.code, 0) << r.output;
        r = run("characterize --open " + path("std_open.s1p") + " --short " + path("std_short.s1p") + " --load " +
                path("std_load.s1p") + " -o " + path("cal.json"));
        ASSERT_EQ(r.code, 0) << r.output;
        EXPECT_NE(r.output.find("singular=0"), std::string::npos);
        auto cal = parse_calibration(read_file(path("cal.json")));
        auto ref = k_from_abcd(network_abcd(m, FrequencyGrid::default_sweep()), m.z0);
        ASSERT_EQ(cal.size(), ref.size());
        for (std::size_t i = 0; i < cal.size(); ++i) {
            EXPECT_LE(oracle::rel_err(cal[i].k1, ref[i].k1), 1e-9);
            EXPECT_LE(oracle::rel_err(cal[i].k2, ref[i].k2), 1e-9);
            EXPECT_LE(oracle::rel_err(cal[i].k3, ref[i].k3), 1e-9);
        }
    }
}

TEST_F(Cli, TruncatedStandardNamesFileAndLine) {
    auto model = model_file(transparent_model());
    ASSERT_EQ(run("simulate --model " + model + " -t osl -o " + path("std")).code, 0);
    auto text = read_file(path("std_open.s1p"));
    // Cut the 10th data row in half.
    std::size_t pos = 0;
    for (int i = 0; i < 12; ++i) pos = text.find('\n', pos) + 1;
    const std::size_t end = text.find('\n', pos);
    const std::size_t space = text.find(' ', text.find(' ', pos) + 1);
    ASSERT_LT(space, end);
    write("std_open.s1p", text.substr(0, space) + "\n");
    auto r = run("characterize --open " + path("std_open.s1p") + " --short " + path("std_short.s1p") + " --load " +
                 path("std_load.s1p") + " -o " + path("cal.json"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("std_open.s1p:13"), std::string::npos) << r.output;
    EXPECT_FALSE(fs::exists(path("cal.json")));
}

TEST_F(Cli, ShiftedStandardNeedsResample) {
    CircuitModel m;
    m.probe = {1.3, 100e-6, 0.4e-6, 20e-12, 0.2};
    auto model = model_file(m);
    ASSERT_EQ(run("--grid 150e3:30e6:201:log simulate --model " + model + " -t osl -o " + path("a")).code, 0);
    ASSERT_EQ(run("--grid 140e3:31e6:211:log simulate --model " + model + " -t osl -o " + path("b")).code, 0);
    const std::string args = "characterize --open " + path("a_open.s1p") + " --short " + path("b_short.s1p") +
                             " --load " + path("a_load.s1p") + " -o " + path("cal.json");
    auto r = run(args);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("GridMismatch"), std::string::npos);
    r = run("--resample " + args);
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("extrapolated=0"), std::string::npos) << r.output;
    auto cal = parse_calibration(read_file(path("cal.json")));
    EXPECT_EQ(cal.count_flagged(flags::extrapolated), 0u);
    EXPECT_EQ(cal.size(), 201u);
}

TEST_F(Cli, SingularStandardsExitTwo) {
    auto grid = FrequencyGrid::logarithmic(1e6, 10e6, 10);
    std::vector<Complex> o(10, 1.0), s(10, -1.0), l(10, 0.0);
    s[4] = l[4] = 0.2;
    TouchstoneWriteOptions opt;
    write("o.s1p", write_touchstone(ComplexSweep(grid, o, SweepRole::reflection), ReferenceImpedance(50.0), opt));
    write("s.s1p", write_touchstone(ComplexSweep(grid, s, SweepRole::reflection), ReferenceImpedance(50.0), opt));
    write("l.s1p", write_touchstone(ComplexSweep(grid, l, SweepRole::reflection), ReferenceImpedance(50.0), opt));
    auto r = run("characterize --open " + path("o.s1p") + " --short " + path("s.s1p") + " --load " + path("l.s1p") +
                 " -o " + path("cal.json"));
    EXPECT_EQ(r.code, 2) << r.output;
    EXPECT_NE(r.output.find("singular=1"), std::string::npos);
    EXPECT_TRUE(parse_calibration(read_file(path("cal.json"))).is_singular(4));
}

TEST_F(Cli, ExtractRecoversMatchedLoad) {
    std::mt19937_64 rng(99);
    auto m = oracle::random_model(rng);
    auto model = model_file(m);
    ASSERT_EQ(run("simulate --model " + model + " -t osl --digits 17 -o " + path("std")).code, 0);
    ASSERT_EQ(run("simulate --model " + model + " -t R=50 --digits 17 -o " + path("dut.s1p")).code, 0);
    ASSERT_EQ(run("characterize --open " + path("std_open.s1p") + " --short " + path("std_short.s1p") +
                  " --load " + path("std_load.s1p") + " -o " + path("cal.json"))
                  .code,
              0);
    auto r = run("extract --gamma " + path("dut.s1p") + " --cal " + path("cal.json") + " -o " + path("z.csv"));
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("singular=0"), std::string::npos);
    auto z = parse_impedance_csv(read_file(path("z.csv")));
    ASSERT_EQ(z.size(), 201u);
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_LE(std::abs(z.magnitude_ohm(i) - 50.0) / 50.0, 1e-6);
}

TEST_F(Cli, ExtractRejectsDisjointGrids) {
    auto model = model_file(transparent_model());
    ASSERT_EQ(run("--grid 150e3:1e6:11 simulate --model " + model + " -t osl -o " + path("std")).code, 0);
    ASSERT_EQ(run("characterize --open " + path("std_open.s1p") + " --short " + path("std_short.s1p") +
                  " --load " + path("std_load.s1p") + " -o " + path("cal.json"))
                  .code,
              0);
    ASSERT_EQ(run("--grid 2e6:30e6:11 simulate --model " + model + " -t R=10 -o " + path("dut.s1p")).code, 0);
    for (const char* flag : {"", "--resample "}) {
        auto r = run(std::string(flag) + "extract --gamma " + path("dut.s1p") + " --cal " + path("cal.json") +
                     " -o " + path("z.csv"));
        EXPECT_EQ(r.code, 1);
        EXPECT_NE(r.output.find("SpanError"), std::string::npos) << r.output;
    }
}

TEST_F(Cli, ExtractFlagsPoleBin) {
    auto model = model_file(transparent_model());
    ASSERT_EQ(run("--grid 1e6:10e6:5 simulate --model " + model + " -t osl -o " + path("std")).code, 0);
    ASSERT_EQ(run("characterize --open " + path("std_open.s1p") + " --short " + path("std_short.s1p") +
                  " --load " + path("std_load.s1p") + " -o " + path("cal.json"))
                  .code,
              0);
    auto grid = FrequencyGrid::logarithmic(1e6, 10e6, 5);
    std::vector<Complex> g{0.1, 0.2, 1.0, 0.3, 0.0};
    write("dut.s1p", write_touchstone(ComplexSweep(grid, g, SweepRole::reflection), ReferenceImpedance(50.0)));
    auto r = run("extract --gamma " + path("dut.s1p") + " --cal " + path("cal.json") + " -o " + path("z.csv"));
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("singular=1"), std::string::npos);
    auto z = parse_impedance_csv(read_file(path("z.csv")));
    EXPECT_TRUE(z.is_singular(2));
    EXPECT_FALSE(z.is_singular(1));
    EXPECT_NE(read_file(path("z.csv")).find(",,,,,SINGULAR\n"), std::string::npos);
}

TEST_F(Cli, SimulateIsDeterministic) {
    auto model = write("m.json", read_file(fs::path(CMIMP_SOURCE_DIR) / "examples_data" / "example_model.json"));
    const std::string cmd = "--seed 7 simulate --model " + model + " -t SERIES:R=5,L=1e-6 -o ";
    ASSERT_EQ(run(cmd + path("a.s1p")).code, 0);
    ASSERT_EQ(run(cmd + path("b.s1p")).code, 0);
    ASSERT_EQ(run("--seed 8 simulate --model " + model + " -t SERIES:R=5,L=1e-6 -o " + path("c.s1p")).code, 0);
    EXPECT_EQ(read_file(path("a.s1p")), read_file(path("b.s1p")));
    EXPECT_NE(read_file(path("a.s1p")), read_file(path("c.s1p")));
    EXPECT_EQ(read_file(path("a.s1p")).find("created="), std::string::npos);
    ASSERT_EQ(run("--stamp " + cmd + path("d.s1p")).code, 0);
    EXPECT_NE(read_file(path("d.s1p")).find("created="), std::string::npos);
}

TEST_F(Cli, SimulateMatchedTransparentChain) {
    auto model = model_file(transparent_model());
    ASSERT_EQ(run("simulate --model " + model + " -t R=50 -o " + path("z.s1p")).code, 0);
    auto doc = parse_touchstone(read_file(path("z.s1p")));
    ASSERT_EQ(doc.values.size(), 201u);
    for (auto v : doc.values) EXPECT_EQ(v, Complex(0.0));
    EXPECT_EQ(run("simulate --model " + model + " -t R=-5 -o " + path("bad.s1p")).code, 1);
    write("broken.json", R"({"format":"cmimp-model","version":1,"probe":{"turns_ratio":-1}})");
    EXPECT_EQ(run("simulate --model " + path("broken.json") + " -t R=5 -o " + path("bad.s1p")).code, 1);
}

TEST_F(Cli, CompareVerdicts) {
    auto grid = FrequencyGrid::logarithmic(150e3, 30e6, 51);
    std::vector<Complex> a(grid.size()), b(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        a[i] = Complex(10.0, grid[i] * 1e-6);
        b[i] = 2.0 * a[i];
    }
    std::vector<PointFlags> f(grid.size(), 0);
    auto pa = write("a.csv", csv_of(ImpedanceSweep(grid, a, f)));
    auto pb = write("b.csv", csv_of(ImpedanceSweep(grid, b, f)));

    auto r = run("compare --run x=" + pa + " --run y=" + pa);
    EXPECT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("max     0.0000 dB"), std::string::npos) << r.output;

    r = run("compare --run x=" + pa + " --run y=" + pb + " --csv " + path("c.csv"));
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.output.find("6.0206 dB"), std::string::npos) << r.output;
    EXPECT_NE(read_file(path("c.csv")).find(",6.02059991,"), std::string::npos);
    EXPECT_EQ(run("compare --threshold 6.1 --run x=" + pa + " --run y=" + pb).code, 0);

    EXPECT_EQ(run("compare --run x=" + pa).code, 1);
    EXPECT_EQ(run("compare --run x=" + pa + " --run x=" + pb).code, 1);
    EXPECT_EQ(run("compare --run x=" + pa + " --run y=" + pb + " --group x,z").code, 1);
    EXPECT_EQ(run("compare --run x=" + pa + " --run y=" + pb + " --bands 1e6:1e5").code, 1);
}

TEST_F(Cli, ConfigFileAndOverrides) {
    auto model = model_file(transparent_model());
    auto cfg = write("session.json", R"({"grid": "1e6:2e6:3:lin", "z_std_ohm": 25, "output_dir": ")" +
                                         dir.string() + R"(/out"})");
    ASSERT_EQ(run("--config " + cfg + " simulate --model " + model + " -t osl -o std").code, 0);
    auto load = parse_touchstone(read_file(path("out/std_load.s1p")));
    ASSERT_EQ(load.values.size(), 3u);
    EXPECT_NEAR(load.values[0].real(), -1.0 / 3.0, 1e-9);
    ASSERT_EQ(run("--config " + cfg + " --grid 1e6:2e6:5 simulate --model " + model + " -t osl -o std").code, 0);
    EXPECT_EQ(parse_touchstone(read_file(path("out/std_load.s1p"))).values.size(), 5u);

    write("bad.json", R"({"grid": "1e6:2e6:3", "tol_cond": -1})");
    EXPECT_EQ(run("--config " + path("bad.json") + " simulate --model " + model + " -t R=1 -o x.s1p").code, 1);
    write("unknown.json", R"({"gird": "1e6:2e6:3"})");
    EXPECT_EQ(run("--config " + path("unknown.json") + " simulate --model " + model + " -t R=1 -o x.s1p").code, 1);
}

TEST_F(Cli, ReportOutputs) {
    auto model = model_file(transparent_model());
    ASSERT_EQ(run("--grid 1e6:10e6:4 simulate --model " + model + " -t osl -o " + path("std")).code, 0);
    ASSERT_EQ(run("characterize --open " + path("std_open.s1p") + " --short " + path("std_short.s1p") +
                  " --load " + path("std_load.s1p") + " -o " + path("cal.json"))
                  .code,
              0);
    auto r = run("report --cal " + path("cal.json"));
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.output.rfind("frequency_hz,k1_re,k1_im,k1_mag,", 0), 0u);
    EXPECT_NE(r.output.find("\n1000000,-50,0,50,-50,0,50,-1,0,1,1,\n"), std::string::npos) << r.output;
    EXPECT_EQ(run("report").code, 1);
}
