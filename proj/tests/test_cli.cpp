// Runs the mfl executable and checks its exit codes.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "mfl_cli_test";

int mfl(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" MFL_CLI_PATH "\" " + args + " > \"" + (kDir / "stdout.txt").string() +
                            "\" 2> \"" + (kDir / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& text) {
    fs::create_directories(kDir);
    const fs::path p = kDir / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const char* kSim = "model = mckean_ou\ntheta = [-1, 1, 0.5]\nN = 20\nT = 1\nm = 10\nseed = 42\n";

}  // namespace

TEST_CASE("passing run exits 0") {
    fs::remove_all(kDir);
    const auto cfg = write_config("sim.txt", kSim);
    CHECK(mfl("simulate --config " + cfg.string() + " --out " + (kDir / "sim").string()) == 0);
    CHECK(fs::exists(kDir / "sim" / "paths.csv"));
    CHECK(slurp(kDir / "stdout.txt").find("pass: true") != std::string::npos);
}

TEST_CASE("failing pass flag exits 1") {
    const auto cfg = write_config("norm.txt",
                                  "model = mckean_ou\ntheta = [-1, 1, 0.5]\ninit_mean = 3\nN = 300\nT = 1\nm = 50\n"
                                  "R = 4\nseed = 1\n");
    CHECK(mfl("normality --config " + cfg.string() + " --out " + (kDir / "norm").string()) == 1);
}

TEST_CASE("configuration errors exit 2") {
    const auto bad = write_config("bad.txt", std::string(kSim) + "colour = blue\n");
    CHECK(mfl("simulate --config " + bad.string() + " --out " + (kDir / "bad").string()) == 2);
    CHECK(slurp(kDir / "stderr.txt").find("unknown key 'colour'") != std::string::npos);
    CHECK(mfl("simulate --config " + (kDir / "missing.txt").string()) == 2);
    CHECK(mfl("simulate") == 2);
    CHECK(mfl("verify --suite nope --out " + (kDir / "v").string()) == 2);
    CHECK(mfl("frobnicate") == 2);
}

TEST_CASE("seed flag and thread count leave artifacts reproducible") {
    const auto cfg = write_config("sim2.txt", kSim);
    REQUIRE(mfl("simulate --config " + cfg.string() + " --seed 7 --out " + (kDir / "a").string()) == 0);
    REQUIRE(mfl("simulate --config " + cfg.string() + " --seed 7 --out " + (kDir / "b").string(), "MFL_THREADS=3") ==
            0);
    REQUIRE(mfl("simulate --config " + cfg.string() + " --seed 8 --out " + (kDir / "c").string()) == 0);
    CHECK(slurp(kDir / "a" / "paths.csv") == slurp(kDir / "b" / "paths.csv"));
    CHECK(slurp(kDir / "a" / "paths.csv") != slurp(kDir / "c" / "paths.csv"));
    CHECK(slurp(kDir / "a" / "paths.meta.json").find("\"seed\": \"7\"") != std::string::npos);
    fs::remove_all(kDir);
}
