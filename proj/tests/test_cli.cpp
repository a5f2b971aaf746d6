#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnprobe/commands.hpp"
#include "dnprobe/config.hpp"
#include "dnprobe/io.hpp"

using namespace dnprobe;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"(
[grid]
dim = 2
h = 1/16
dt = 1/16
T = 2
patch = left 1/16 15/16
pad = 1.0
[material]
gamma2 = constant 1
rho2 = constant 1
dgamma = constant 1
eps = 0.02
[probe]
x0 = 0 0.5
t0 = 1
)";

// kBase with one line added to a section (INI sections may appear only once).
std::string with(const std::string& section, const std::string& line) {
    std::string s = kBase;
    const std::string head = "[" + section + "]\n";
    const auto at = s.find(head);
    if (at == std::string::npos) return s + head + line + "\n";
    return s.insert(at + head.size(), line + "\n");
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dnprobe_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "run.ini";
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "dnprobe");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("numbers and lists accept fractions") {
    CHECK(parse_number("1/64") == 1.0 / 64);
    CHECK(parse_number("-2e-3") == -2e-3);
    CHECK_THROWS_AS(parse_number("1/0"), ConfigError);
    CHECK_THROWS_AS(parse_number("abc"), ConfigError);
    CHECK(parse_list("0.2, 1/8 0.05") == std::vector<double>{0.2, 0.125, 0.05});
}

TEST_CASE("config defaults, validation and unknown keys") {
    const ExperimentConfig c = parse_config(kBase);
    CHECK(c.grid.h == 1.0 / 16);
    CHECK(c.law_first().gamma(0.3, 0.0) == doctest::Approx(1.02));
    CHECK(c.law_second().gamma(0.3, 0.0) == 1.0);
    CHECK(c.k_list == std::vector<double>{4, 8, 16, 32});
    const ExperimentConfig d = parse_config("[grid]\ndim=2\nh=1/16\ndt=1/16\nT=1\npatch=left 1/4 3/4\n");
    CHECK(d.t0 == 0.5);
    CHECK(d.x0[1] == 0.5);

    try {
        parse_config(with("probe", "colour = red"));
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("probe.colour") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(with("extras", "a = 1")), ConfigError);
    CHECK_THROWS_AS(parse_config("[grid]\ndim=2\nh=1/16\ndt=0.3\nT=1\npatch=left 1/4 3/4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(with("material", "A = full 1 2 1")), ConfigError);
}

TEST_CASE("config hash ignores the output section and comments") {
    const ExperimentConfig a = parse_config(kBase);
    const ExperimentConfig b = parse_config("# note\n" + with("output", "dir = elsewhere"));
    const ExperimentConfig c = parse_config(with("run", "seed = 7"));
    CHECK(a.hash_hex() == b.hash_hex());
    CHECK(a.hash_hex() != c.hash_hex());
    CHECK(a.hash_hex().size() == 16u);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("csv rendering carries the hash line") {
    CsvTable t({"a", "b"});
    t.add({"1", "2"});
    const std::string s = t.render("00ff", "l2");
    CHECK(s.rfind("# config_hash=00ff", 0) == 0);
    CHECK(s.find("a,b\n1,2\n") != std::string::npos);
    CHECK(std::stod(format_double(0.1)) == 0.1);
}

TEST_CASE("unknown key: exit 2 naming the key") {
    const fs::path dir = scratch("badkey");
    const fs::path cfg = write_config(dir, with("grid", "spacing = 3"));
    const Run r = run({"forward", "-c", cfg.string(), "-o", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("grid.spacing") != std::string::npos);
#ifdef DNPROBE_CLI_PATH
    const std::string cmd = std::string(DNPROBE_CLI_PATH) + " forward -c " + cfg.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 2);
#endif
}

TEST_CASE("usage errors exit 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"forward"}).code == 2);
    CHECK(run({"forward", "-c", "/nonexistent/file.ini"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("zero data: all-zero flux, deterministic output, hash line") {
    const fs::path dir = scratch("zero");
    const fs::path cfg = write_config(dir, with("forward", "data = zero"));
    REQUIRE(run({"forward", "-c", cfg.string(), "-o", (dir / "a").string()}).code == 0);
    REQUIRE(run({"forward", "-c", cfg.string(), "-o", (dir / "b").string()}).code == 0);
    const std::string csv = slurp(dir / "a" / "forward_flux.csv");
    CHECK(csv == slurp(dir / "b" / "forward_flux.csv"));
    const std::string hash = parse_config(slurp(cfg)).hash_hex();
    CHECK(csv.rfind("# config_hash=" + hash, 0) == 0);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line.substr(line.rfind(',') + 1) == "flux");
    int rows = 0;
    while (std::getline(in, line)) {
        CHECK(std::stod(line.substr(line.rfind(',') + 1)) == 0.0);
        ++rows;
    }
    CHECK(rows == 33 * 13);
    CHECK(fs::file_size(dir / "a" / "forward_u.bin") == 33u * 17 * 17 * sizeof(double));
    const auto meta = nlohmann::json::parse(slurp(dir / "a" / "forward_u.json"));
    CHECK(meta["config_hash"] == hash);
}

TEST_CASE("manufactured study prints orders") {
    const fs::path dir = scratch("mms");
    const fs::path cfg = write_config(dir, with("forward", "mms = space"));
    const Run r = run({"forward", "-c", cfg.string(), "-o", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("order") != std::string::npos);
    CHECK(fs::exists(dir / "mms.csv"));
}

TEST_CASE("probe with a two-point sweep reports an insufficient sweep") {
    const fs::path dir = scratch("probe");
    const fs::path cfg = write_config(dir, with("sweep", "tau_list = 0.3 0.2"));
    REQUIRE(run({"probe-gamma", "-c", cfg.string(), "-o", dir.string()}).code == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "probe_gamma.json"));
    CHECK(j["fitted_rate"].is_null());
    CHECK(j["rate_note"].get<std::string>().find("insufficient sweep") != std::string::npos);
    CHECK(j["config_hash"] == parse_config(slurp(cfg)).hash_hex());
    CHECK(slurp(dir / "probe_gamma.csv").rfind("# config_hash=", 0) == 0);

    REQUIRE(run({"report", "-o", dir.string()}).code == 0);
    const auto rep = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(rep.dump().find("probe_gamma") != std::string::npos);
}

TEST_CASE("rho probe on a 2D config is a runtime error") {
    const fs::path dir = scratch("rho2d");
    const fs::path cfg = write_config(dir, with("sweep", "tau_list = 0.3 0.2"));
    CHECK(run({"probe-rho", "-c", cfg.string(), "-o", dir.string()}).code == 1);
}

TEST_CASE("inadmissible laws are rejected before solving") {
    const fs::path dir = scratch("inadmissible");
    const fs::path cfg = write_config(dir, with("material", "rho1 = affine_t -0.5 1"));
    const Run r = run({"forward", "-c", cfg.string(), "-o", dir.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("rho_floor") != std::string::npos);
}
