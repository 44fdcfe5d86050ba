// End-to-end tests of the installed command-line interface: exit codes,
// output files, determinism across worker counts, and manifest replay.
#include <sys/wait.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "critpairs/report_io.hpp"
#include "critpairs/special.hpp"
#include "critpairs/version.hpp"
#include "doctest.h"

using namespace critpairs;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(CLI_BINARY_PATH) + " " + args + " 2>&1";
  RunResult r;
  std::FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string tmp_path(const std::string& name) {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / "critpairs_cli_tests";
    std::filesystem::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

std::string slurp(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

size_t count_sub(const std::string& hay, const std::string& needle) {
  size_t n = 0, pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

}  // namespace

TEST_CASE("version and usage errors") {
  CHECK(run_cli("--version").exit_code == 0);
  CHECK(run_cli("--version").output.find(version_string) != std::string::npos);
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("no-such-command").exit_code == 2);
}

TEST_CASE("structure-function values print in full precision") {
  RunResult r = run_cli("gfun --t 0");
  CHECK(r.exit_code == 0);
  // first line is exactly the library value, all digits
  CHECK(r.output.rfind(format_double(gfun(0.0)) + "\n", 0) == 0);

  RunResult d = run_cli("gfun --t 0.5 --derivs 1");
  CHECK(d.exit_code == 0);
  CHECK(d.output.find("d1 " + format_double(gfun_d1(0.5))) !=
        std::string::npos);
  CHECK(d.output.find("d2 " + format_double(gfun_d2(0.5))) !=
        std::string::npos);

  CHECK(run_cli("gfun --t 1.5").exit_code == 2);
  CHECK(run_cli("gfun").exit_code == 2);
}

TEST_CASE("randomness-consuming commands demand a seed") {
  const std::string out = tmp_path("noseed.json");
  RunResult r = run_cli("pairing --N 16 --trials 10 --out " + out);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("--seed") != std::string::npos);
}

TEST_CASE("conditioning at a point where the field vanishes is refused") {
  const std::string out = tmp_path("xizero.json");
  RunResult r = run_cli("pairing --N 16 --trials 10 --seed 1 --xi 0+0i --out " +
                        out);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("dphi") != std::string::npos);
}

TEST_CASE("pairing runs write report, csv, and manifest deterministically") {
  const std::string outA = tmp_path("pairA.json");
  const std::string csvA = tmp_path("pairA.csv");
  const std::string argsA = "pairing --N 16,32 --trials 150 --seed 7 --out " +
                            outA + " --csv " + csvA;
  RunResult a = run_cli(argsA);
  CHECK(a.exit_code == 0);
  CHECK(std::filesystem::exists(outA));
  CHECK(std::filesystem::exists(csvA));
  CHECK(std::filesystem::exists(outA + ".manifest.json"));

  PairingReport rep = read_pairing_json(outA);
  REQUIRE(rep.per_n.size() == 2);
  CHECK(rep.per_n[0].N == 16);
  CHECK(rep.per_n[0].trials == 150);
  const std::string csv = slurp(csvA);
  CHECK(csv.rfind("N,trials,fail,p_fail,se,mean_outer,var_outer\n", 0) == 0);
  CHECK(count_sub(csv, "\n") == 3);

  // a different worker count must give byte-identical data files
  const std::string outB = tmp_path("pairB.json");
  const std::string csvB = tmp_path("pairB.csv");
  RunResult b = run_cli("pairing --N 16,32 --trials 150 --seed 7 --workers 3" +
                        std::string(" --out ") + outB + " --csv " + csvB);
  CHECK(b.exit_code == 0);
  CHECK(slurp(outA) == slurp(outB));
  CHECK(slurp(csvA) == slurp(csvB));

  // replaying the manifest reproduces the data files byte for byte
  RunManifest man = read_manifest(outA + ".manifest.json");
  CHECK(man.command == "pairing");
  CHECK(man.master_seed == 7);
  std::string replay = "pairing";
  for (const auto& [k, v] : man.config) {
    if (k == "out" || k == "csv" || k == "manifest") continue;
    replay += " --" + k + " " + v;
  }
  const std::string outC = tmp_path("pairC.json");
  const std::string csvC = tmp_path("pairC.csv");
  replay += " --out " + outC + " --csv " + csvC;
  RunResult c = run_cli(replay);
  CHECK(c.exit_code == 0);
  CHECK(slurp(outA) == slurp(outC));
  CHECK(slurp(csvA) == slurp(csvC));
}

TEST_CASE("config files merge under command-line flags") {
  const std::string cfg = tmp_path("run.cfg");
  {
    std::ofstream f(cfg);
    f << "# pairing setup\nN=16,32\ntrials=150\nxi=1+1i\n";
  }
  const std::string outA = tmp_path("cfgA.json");
  RunResult a = run_cli("pairing --config " + cfg + " --seed 7 --out " + outA);
  CHECK(a.exit_code == 0);

  const std::string outB = tmp_path("cfgB.json");
  RunResult b = run_cli(
      "pairing --N 16,32 --trials 150 --xi 1+1i --seed 7 --out " + outB);
  CHECK(b.exit_code == 0);
  CHECK(slurp(outA) == slurp(outB));

  // command line wins over the file
  const std::string outC = tmp_path("cfgC.json");
  RunResult c = run_cli("pairing --config " + cfg +
                        " --trials 80 --seed 7 --out " + outC);
  CHECK(c.exit_code == 0);
  CHECK(read_pairing_json(outC).per_n[0].trials == 80);

  // unknown keys are configuration errors
  const std::string bad = tmp_path("bad.cfg");
  {
    std::ofstream f(bad);
    f << "trils=100\n";
  }
  CHECK(run_cli("pairing --config " + bad + " --seed 7 --out " +
                tmp_path("cfgD.json"))
            .exit_code == 2);
}

TEST_CASE("sample command writes the divisor data") {
  const std::string out = tmp_path("sample.json");
  RunResult r = run_cli("sample --N 20 --seed 3 --out " + out);
  CHECK(r.exit_code == 0);
  SampleData s = read_sample_json(out);
  CHECK(s.N == 20);
  CHECK(!s.xi.has_value());
  CHECK(s.zeros.size() == 20);
  CHECK(s.crits.size() == 19);
  CHECK(s.coefficients.size() == 21);

  const std::string out2 = tmp_path("sample_cond.json");
  RunResult r2 = run_cli("sample --N 20 --seed 3 --xi 1+1i --out " + out2);
  CHECK(r2.exit_code == 0);
  SampleData s2 = read_sample_json(out2);
  REQUIRE(s2.xi.has_value());
  double best = 1e300;
  for (const auto& z : s2.zeros) best = std::min(best, std::abs(z - *s2.xi));
  CHECK(best < 1e-6);  // conditioning pins a zero at xi
}

TEST_CASE("moment and displacement commands emit their reports") {
  const std::string m = tmp_path("moments.json");
  RunResult r = run_cli("moments --N 16 --trials 100 --seed 5 --rule r_minus" +
                        std::string(" --out ") + m);
  CHECK(r.exit_code == 0);
  MomentReport mr = read_moment_json(m);
  REQUIRE(mr.rows.size() == 1);
  CHECK(mr.rows[0].N == 16);
  CHECK(mr.rows[0].trials == 100);

  CHECK(run_cli("moments --N 16 --trials 10 --seed 5 --rule explicit --out " +
                tmp_path("m2.json"))
            .exit_code == 2);  // explicit rule without --radius

  const std::string d = tmp_path("disp.json");
  RunResult rd = run_cli("displacement --N 32 --trials 200 --seed 5 --out " + d);
  CHECK(rd.exit_code == 0);
  DisplacementReport dr = read_displacement_json(d);
  REQUIRE(dr.rows.size() == 1);
  CHECK(dr.rows[0].successes > 0);
}

TEST_CASE("check commands gate on the agreement threshold") {
  const std::string base =
      " --N 16 --trials 400 --seed 11 --out " + tmp_path("chk.json");
  RunResult ok = run_cli("expectation-check --max-se 6" + base);
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("OK") != std::string::npos);

  RunResult bad = run_cli("expectation-check --max-se 0.000001" + base);
  CHECK(bad.exit_code == 3);
  CHECK(bad.output.find("MISMATCH") != std::string::npos);

  RunResult var = run_cli("variance-check --N 16 --trials 500 --seed 11 " +
                          std::string("--max-se 6"));
  CHECK(var.exit_code == 0);
}

TEST_CASE("kernel limit sweep prints errors and contraction ratios") {
  const std::string out = tmp_path("kl.csv");
  RunResult r = run_cli("kernel-limit --N 16,64 --grid 6 --out " + out);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("sup_err=") != std::string::npos);
  CHECK(r.output.find("ratio 16->64:") != std::string::npos);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("N,sup_err,diag_err\n", 0) == 0);
  CHECK(count_sub(csv, "\n") == 3);

  CHECK(run_cli("kernel-limit --N 16 --grid 1").exit_code == 2);
}

TEST_CASE("flowlines command renders the figure") {
  const std::string svg = tmp_path("flow.svg");
  const std::string csv = tmp_path("flow.csv");
  RunResult r = run_cli(
      "flowlines --N 30 --seed 9 --seeds-per-side 4 --xi 1+1i --out " + svg +
      " --csv " + csv);
  CHECK(r.exit_code == 0);
  const std::string body = slurp(svg);
  CHECK(count_sub(body, "class=\"flow\"") == 16);
  CHECK(count_sub(body, "class=\"zero\"") == 30);
  CHECK(count_sub(body, "class=\"crit\"") == 29);
  CHECK(count_sub(body, "class=\"annulus\"") == 2);
  const std::string fcsv = slurp(csv);
  CHECK(fcsv.rfind("kind,index,re,im\n", 0) == 0);
}
