#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "bandflow/io.hpp"

namespace fs = std::filesystem;
using namespace bandflow;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

const fs::path& workdir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "bandflow_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Outcome cli(const std::string& args) {
    const auto out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
    const std::string cmd =
        std::string("\"") + BANDFLOW_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return {WEXITSTATUS(status), io::read_text(out), io::read_text(err)};
}

std::string dir(const std::string& name) { return (workdir() / name).string(); }

}  // namespace

TEST_CASE("successful runs exit 0") {
    auto r = cli("kernels --set n_max=2 --set table_step=0.5 --out " + dir("k1"));
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS kernel_cardinal") != std::string::npos);
    CHECK(fs::exists(dir("k1") + "/manifest.json"));

    const auto cfg = workdir() / "kernels.cfg";
    io::write_text(cfg, "[experiment]\nkind = kernels\n\n[bank]\nn_max = 2\ntable_step = 0.5\n");
    r = cli("run --config " + cfg.string() + " --jobs 2 --out " + dir("k2"));
    CHECK(r.code == 0);

    r = cli("defaults");
    CHECK(r.code == 0);
    CHECK(r.out.find("[verify]") != std::string::npos);
}

TEST_CASE("compare exits 0 on equal runs and 1 on differences") {
    cli("kernels --set n_max=2 --set table_step=0.5 --out " + dir("c1"));
    cli("kernels --set n_max=2 --set table_step=0.5 --out " + dir("c2"));
    cli("kernels --set n_max=2 --set table_step=0.25 --out " + dir("c3"));
    auto r = cli("compare " + dir("c1") + " " + dir("c2"));
    CHECK(r.code == 0);
    r = cli("compare " + dir("c1") + " " + dir("c3"));
    CHECK(r.code == 1);
    CHECK(r.out.find("interp_kernel.csv") != std::string::npos);
    r = cli("compare " + dir("c1") + " " + dir("missing"));
    CHECK(r.code == 2);
}

TEST_CASE("failing checks exit 1 and are named") {
    const auto r = cli("embed --set flow.kind=torus --set mesh=4 --set window=10 --set pipeline.eps=1 --out " +
                       dir("strict"));
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL injectivity") != std::string::npos);
    CHECK(r.err.find("failing checks: injectivity") != std::string::npos);
}

TEST_CASE("input errors exit 2 with a message") {
    auto r = cli("embed --out " + dir("e1"));
    CHECK(r.code == 2);
    CHECK(r.err.find("flow.kind") != std::string::npos);

    const auto bad = workdir() / "bad.cfg";
    io::write_text(bad, "[experiment]\nkind mdim\n");
    r = cli("run --config " + bad.string());
    CHECK(r.code == 2);
    CHECK(r.err.find("line 2, column 1") != std::string::npos);

    r = cli("mdim --set eps=0.1");
    CHECK(r.code == 2);
    CHECK(r.err.find("ambiguous") != std::string::npos);

    CHECK(cli("run").code == 2);
    CHECK(cli("run --config " + dir("nope.cfg")).code == 2);
    CHECK(cli("mdim --jobs 0").code == 2);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("compare " + dir("x") + " " + dir("y") + " --tol k_n").code == 2);
}
