#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>

#include "recurmix/io.hpp"

#include "test_helpers.hpp"

// RECURMIX_CLI_PATH is injected by the build: the path of the built binary.

using testutil::run_command;
using testutil::scratch_dir;
using testutil::slurp;

namespace {

const std::string cli = RECURMIX_CLI_PATH;

std::string q(const std::string& s) { return "'" + s + "'"; }

}  // namespace

TEST_CASE("simulate writes the dataset files and is reproducible") {
    const std::string dir = scratch_dir("cli_sim");
    const std::string cmd = cli + " simulate --scenario well_separated --n 30 --seed 5 --out " +
                            q(dir + "/a") + " 2>/dev/null";
    auto res = run_command(cmd);
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("# recurmix simulate report") == 0);
    for (const char* f :
         {"subjects.csv", "events.csv", "labels.csv", "model.txt", "scenario.txt"})
        CHECK(std::filesystem::exists(dir + "/a/" + f));

    const auto res2 = run_command(cli + " simulate --scenario well_separated --n 30 --seed 5" +
                                  " --out " + q(dir + "/b") + " 2>/dev/null");
    CHECK(res2.exit_code == 0);
    CHECK(slurp(dir + "/a/subjects.csv") == slurp(dir + "/b/subjects.csv"));
    CHECK(slurp(dir + "/a/events.csv") == slurp(dir + "/b/events.csv"));
    CHECK(slurp(dir + "/a/labels.csv") == slurp(dir + "/b/labels.csv"));

    // a different seed must produce different data
    run_command(cli + " simulate --scenario well_separated --n 30 --seed 6 --out " +
                q(dir + "/c") + " 2>/dev/null");
    CHECK(slurp(dir + "/a/events.csv") != slurp(dir + "/c/events.csv"));
}

TEST_CASE("fit emits byte-identical reports for the same seed") {
    const std::string dir = scratch_dir("cli_fit");
    REQUIRE(run_command(cli + " simulate --scenario well_separated --n 60 --seed 3 --out " +
                        q(dir) + " 2>/dev/null")
                .exit_code == 0);
    const std::string fit_cmd =
        cli + " fit --data " + q(dir) + " --K 2 --seed 7 --restarts 4 2>/dev/null";
    const auto a = run_command(fit_cmd);
    const auto b = run_command(fit_cmd);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("# recurmix fit report") == 0);
    CHECK(a.out.find("# table = parameters") != std::string::npos);

    // --out writes the same bytes to a file
    const std::string with_out = cli + " fit --data " + q(dir) + " --K 2 --seed 7" +
                                 " --restarts 4 --out " + q(dir + "/report.csv") +
                                 " 2>/dev/null";
    const auto c = run_command(with_out);
    CHECK(c.exit_code == 0);
    CHECK(slurp(dir + "/report.csv") == a.out);
}

TEST_CASE("reports are byte-identical across RECURMIX_THREADS settings") {
    const std::string dir = scratch_dir("cli_threads");
    REQUIRE(run_command(cli + " simulate --scenario mixed --n 50 --seed 9 --out " + q(dir) +
                        " 2>/dev/null")
                .exit_code == 0);
    const std::string base =
        " fit --data " + q(dir) + " --K 2 --seed 11 --restarts 3 2>/dev/null";
    const auto t1 = run_command("RECURMIX_THREADS=1 " + cli + base);
    const auto t4 = run_command("RECURMIX_THREADS=4 " + cli + base);
    const auto t0 = run_command("RECURMIX_THREADS=0 " + cli + base);
    CHECK(t1.exit_code == 0);
    CHECK(t1.out == t4.out);
    CHECK(t1.out == t0.out);
}

TEST_CASE("select prints a sweep and the chosen K") {
    const std::string dir = scratch_dir("cli_select");
    REQUIRE(run_command(cli + " simulate --scenario well_separated --n 150 --seed 13 --out " +
                        q(dir) + " 2>/dev/null")
                .exit_code == 0);
    const auto res = run_command(cli + " select --data " + q(dir) +
                                 " --kmin 1 --kmax 3 --seed 13 --restarts 4 2>/dev/null");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("# chosen_K = 2\n") != std::string::npos);
    CHECK(res.out.find("K,ok,loglik,n_params,bic,failure\n") != std::string::npos);
}

TEST_CASE("fit, save-model and classify form a pipeline") {
    const std::string dir = scratch_dir("cli_pipeline");
    REQUIRE(run_command(cli + " simulate --scenario well_separated --n 80 --seed 17 --out " +
                        q(dir) + " 2>/dev/null")
                .exit_code == 0);
    REQUIRE(run_command(cli + " fit --data " + q(dir) + " --K 2 --seed 17 --restarts 4" +
                        " --save-model " + q(dir + "/fitted.txt") + " >/dev/null 2>&1")
                .exit_code == 0);
    CHECK(std::filesystem::exists(dir + "/fitted.txt"));

    const auto res = run_command(cli + " classify --data " + q(dir) + " --model " +
                                 q(dir + "/fitted.txt") + " 2>/dev/null");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("# recurmix classify report") == 0);
    CHECK(res.out.find("id,class,rho_1,rho_2") != std::string::npos);

    // classifying against the generating model also works
    const auto res2 = run_command(cli + " classify --data " + q(dir) + " --model " +
                                  q(dir + "/model.txt") + " 2>/dev/null");
    CHECK(res2.exit_code == 0);
}

TEST_CASE("mc emits a parseable report") {
    const auto res =
        run_command(cli + " mc --scenario mixed --n 40 --reps 2 --seed 19 2>/dev/null");
    CHECK(res.exit_code == 0);
    std::istringstream is(res.out);
    const recurmix::MCReport rep = recurmix::parse_mc_report(is);
    CHECK(rep.R == 2);
    CHECK(rep.n_subjects == 40);
    CHECK(rep.replications.size() == 2);
}

TEST_CASE("scenario files feed simulate and mc") {
    const std::string dir = scratch_dir("cli_scenario_file");
    REQUIRE(run_command(cli + " simulate --scenario mixed --n 25 --seed 23 --out " + q(dir) +
                        " 2>/dev/null")
                .exit_code == 0);
    // reuse the emitted scenario file, overriding n
    const auto res = run_command(cli + " simulate --scenario " + q(dir + "/scenario.txt") +
                                 " --n 10 --out " + q(dir + "/again") + " 2>/dev/null");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("# n_subjects = 10\n") != std::string::npos);
    const auto mc_res = run_command(cli + " mc --scenario " + q(dir + "/scenario.txt") +
                                    " --n 20 --reps 1 --seed 23 2>/dev/null");
    CHECK(mc_res.exit_code == 0);
}

TEST_CASE("input problems exit with code 2") {
    const std::string dir = scratch_dir("cli_exit2");
    SUBCASE("unknown flag") {
        CHECK(run_command(cli + " fit --nope 2>/dev/null").exit_code == 2);
    }
    SUBCASE("no subcommand") { CHECK(run_command(cli + " 2>/dev/null").exit_code == 2); }
    SUBCASE("unknown subcommand") {
        CHECK(run_command(cli + " frobnicate 2>/dev/null").exit_code == 2);
    }
    SUBCASE("missing required option") {
        CHECK(run_command(cli + " fit --K 2 2>/dev/null").exit_code == 2);
    }
    SUBCASE("missing data directory") {
        CHECK(run_command(cli + " fit --data " + q(dir + "/nowhere") +
                          " --K 2 2>/dev/null")
                  .exit_code == 2);
    }
    SUBCASE("unknown scenario name") {
        CHECK(run_command(cli + " simulate --scenario banana --n 5 --out " + q(dir) +
                          " 2>/dev/null")
                  .exit_code == 2);
    }
    SUBCASE("corrupt csv row") {
        std::filesystem::create_directories(dir);
        std::ofstream(dir + "/subjects.csv") << "id,tau,x1,x2\ns1,1.99,0.5,oops\n";
        std::ofstream(dir + "/events.csv") << "id,time\n";
        CHECK(run_command(cli + " fit --data " + q(dir) + " --K 1 2>/dev/null").exit_code ==
              2);
    }
    SUBCASE("model and data disagree on dimension") {
        REQUIRE(run_command(cli + " simulate --scenario mixed --n 10 --seed 1 --out " +
                            q(dir + "/d") + " 2>/dev/null")
                    .exit_code == 0);
        std::ofstream(dir + "/m.txt") << "K = 1\nd = 1\npi = 1\nclass1.gamma1 = 1\n"
                                      << "class1.gamma2 = 1\nclass1.beta = 0.1\n";
        CHECK(run_command(cli + " classify --data " + q(dir + "/d") + " --model " +
                          q(dir + "/m.txt") + " 2>/dev/null")
                  .exit_code == 2);
    }
}

TEST_CASE("unfittable data exits with code 3") {
    const std::string dir = scratch_dir("cli_exit3");
    REQUIRE(run_command(cli + " simulate --scenario well_separated --n 3 --seed 29 --out " +
                        q(dir) + " 2>/dev/null")
                .exit_code == 0);
    // 3 subjects cannot support 3 classes with 2 covariates; every restart
    // aborts as degenerate and the fit fails
    const auto res =
        run_command(cli + " fit --data " + q(dir) + " --K 3 --restarts 2 2>/dev/null");
    CHECK(res.exit_code == 3);
}

TEST_CASE("help exits cleanly") {
    CHECK(run_command(cli + " --help >/dev/null 2>&1").exit_code == 0);
    CHECK(run_command(cli + " fit --help >/dev/null 2>&1").exit_code == 0);
}
