// Exercises the shared library through its C header only.

#include "mfl/mfl.h"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

TEST_CASE("version and status names") {
    CHECK(std::string(mfl_version()) == "0.1.0");
    CHECK(std::string(mfl_status_name(MFL_OK)) == "ok");
    CHECK(std::string(mfl_status_name(MFL_ERR_CONFIG)) == "config");
}

TEST_CASE("model, drift and simulation") {
    mfl_model* m = nullptr;
    REQUIRE(mfl_model_create("mckean_ou", 1, nullptr, nullptr, 3, nullptr, nullptr, 1.0, &m) == MFL_OK);
    size_t p = 0;
    CHECK(mfl_model_num_params(m, &p) == MFL_OK);
    CHECK(p == 3);

    const double theta[3] = {-1, 1, 0.5};
    const double x = 3.0, atoms[2] = {0.0, 2.0};
    double b = 0.0;
    CHECK(mfl_model_drift(m, theta, 3, 0.0, &x, atoms, 2, &b) == MFL_OK);
    CHECK(b == doctest::Approx(-3 + 1 - 0.5 * 2));

    const double bad[3] = {1, 1, 0.5};
    CHECK(mfl_model_drift(m, bad, 3, 0.0, &x, atoms, 2, &b) == MFL_ERR_DOMAIN);
    CHECK(std::string(mfl_last_error()).find("box") != std::string::npos);

    mfl_paths* paths = nullptr;
    REQUIRE(mfl_simulate(m, theta, 3, 200, 1.0, 100, MFL_INIT_GAUSSIAN, 3.0, 0.5, 11, &paths) == MFL_OK);
    size_t n = 0, steps = 0, d = 0;
    CHECK(mfl_paths_shape(paths, &n, &steps, &d) == MFL_OK);
    CHECK(n == 200);
    CHECK(steps == 100);
    CHECK(d == 1);
    const double* data = nullptr;
    size_t len = 0;
    CHECK(mfl_paths_data(paths, &data, &len) == MFL_OK);
    CHECK(len == 200 * 101);

    double ll = 0.0, score[3], fisher[9], hat[3];
    CHECK(mfl_log_likelihood(m, theta, 3, paths, &ll) == MFL_OK);
    CHECK(std::isfinite(ll));
    CHECK(mfl_score(m, theta, 3, paths, score) == MFL_OK);
    CHECK(mfl_empirical_fisher(m, theta, 3, paths, fisher) == MFL_OK);
    CHECK(fisher[1] == fisher[3]);
    int converged = 0;
    CHECK(mfl_mle(m, paths, theta, 3, MFL_METHOD_LINEAR, 0, hat, &converged) == MFL_OK);
    CHECK(converged == 1);
    CHECK(std::abs(hat[0] + 1) < 1.0);

    const fs::path dir = fs::temp_directory_path() / "mfl_capi_paths";
    fs::create_directories(dir);
    const std::string csv = (dir / "p.csv").string(), meta = (dir / "p.meta.json").string();
    CHECK(mfl_paths_write(paths, csv.c_str(), meta.c_str()) == MFL_OK);
    mfl_paths* back = nullptr;
    REQUIRE(mfl_paths_read(csv.c_str(), meta.c_str(), &back) == MFL_OK);
    const double* data2 = nullptr;
    size_t len2 = 0;
    CHECK(mfl_paths_data(back, &data2, &len2) == MFL_OK);
    REQUIRE(len2 == len);
    CHECK(std::equal(data, data + len, data2));
    mfl_paths_destroy(back);
    fs::remove_all(dir);

    mfl_paths_destroy(paths);
    mfl_model_destroy(m);
}

TEST_CASE("argument errors") {
    mfl_model* m = nullptr;
    CHECK(mfl_model_create("nope", 1, nullptr, nullptr, 3, nullptr, nullptr, 1.0, &m) == MFL_ERR_CONFIG);
    CHECK(mfl_model_create("mckean_ou", 1, nullptr, nullptr, 3, nullptr, nullptr, 1.0, nullptr) ==
          MFL_ERR_INVALID_ARGUMENT);
    const double lo[3] = {-1, -1, -1}, hi[3] = {1, 1, 1};
    CHECK(mfl_model_create("mckean_ou", 1, lo, hi, 3, nullptr, nullptr, 1.0, &m) == MFL_ERR_DOMAIN);
    double out9[9];
    const double th[3] = {-1, 1, 0.5};
    CHECK(mfl_ou_limit_fisher(th, 3.0, 0.5, 1.0, 1.0, 100, out9) == MFL_OK);
    const double same[3] = {-1, 1, -1};
    CHECK(mfl_ou_limit_fisher(same, 3.0, 0.5, 1.0, 1.0, 100, out9) == MFL_ERR_DOMAIN);
    mfl_model_destroy(nullptr);
    mfl_paths_destroy(nullptr);
}

TEST_CASE("config and run") {
    mfl_config* cfg = nullptr;
    CHECK(mfl_config_parse("kind = simulate\nbogus = 1\n", nullptr, nullptr, 0, &cfg) == MFL_ERR_CONFIG);
    CHECK(std::string(mfl_last_error()).find("bogus") != std::string::npos);

    const char* text = "model = mckean_ou\ntheta = [-1, 1, 0.5]\nN = 20\nT = 1\nm = 10\nseed = 3\n";
    const char* keys[] = {"kind"};
    const char* values[] = {"simulate"};
    REQUIRE(mfl_config_parse(text, keys, values, 1, &cfg) == MFL_OK);
    CHECK(std::string(mfl_config_kind(cfg)) == "simulate");
    uint64_t h = 0;
    CHECK(mfl_config_hash(cfg, &h) == MFL_OK);
    CHECK(h != 0);

    const fs::path dir = fs::temp_directory_path() / "mfl_capi_run";
    fs::remove_all(dir);
    mfl_result* res = nullptr;
    REQUIRE(mfl_run(cfg, dir.string().c_str(), 1, &res) == MFL_OK);
    CHECK(mfl_result_pass(res) == 1);
    CHECK(std::string(mfl_result_summary(res)).find("kind: simulate") != std::string::npos);
    CHECK(std::string(mfl_result_manifest(res)).find("paths.csv") != std::string::npos);
    mfl_result_destroy(res);
    mfl_config_destroy(cfg);
    fs::remove_all(dir);

    CHECK(mfl_verify("nope", dir.string().c_str(), 1, nullptr, &res) == MFL_ERR_CONFIG);
}
