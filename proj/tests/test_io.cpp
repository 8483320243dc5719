#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fibrehom/io.hpp"

using namespace fibrehom;
using namespace fibrehom::io;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(FIBREHOM_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fibrehom_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

const char* kAbstract = R"(problem: abstract
seed: 3
eps: {start: 1.0e-3, stop: 0.5, count: 3}
abstract:
  families: 3
  fibres: 2
  dim: [4, 8]
  c: [0.5, 1.0]
  gap: [1.0, 2.0]
output: out
)";

}  // namespace

TEST(Config, LoadsShippedConfigs) {
  const auto cfg = load_config(kConfigs / "laminate_1d.yaml");
  EXPECT_EQ(cfg.kind, ProblemKind::elliptic);
  EXPECT_EQ(cfg.n_trunc, 8);
  EXPECT_EQ(cfg.eps.count, 7);
  EXPECT_TRUE(cfg.flux_random);
  EXPECT_TRUE(cfg.coefficients.count("a"));
  for (const char* name : {"scalar_2d.yaml", "maxwell.yaml", "abstract.yaml", "counterexample.yaml",
                           "laminate_ahom.yaml"}) {
    EXPECT_NO_THROW(load_config(kConfigs / name)) << name;
  }
}

TEST(Config, RejectsUnknownKeysWithLine) {
  const std::string text = std::string(kAbstract) + "bogus: 1\n";
  const std::string msg = message_of([&] { parse_config(text, kConfigs); });
  EXPECT_NE(msg.find("unknown key 'bogus'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 11"), std::string::npos) << msg;
}

TEST(Config, RejectsMissingCoefficientsAndBadProblem) {
  EXPECT_THROW(parse_config("problem: elliptic\nd: 1\nn: 1\ntheta_grid: [3]\noutput: x\n", kConfigs), InputError);
  EXPECT_THROW(parse_config("problem: parabolic\noutput: x\n", kConfigs), InputError);
  EXPECT_THROW(parse_config("problem: elliptic\nd: 1\ncoefficients: {a: nope.coef, s: nope.coef}\noutput: x\n",
                            kConfigs),
               InputError);
  EXPECT_THROW(parse_config("[1, 2]", kConfigs), InputError);
}

TEST(Config, DigestIgnoresOutputAndTracksContent) {
  const auto a = parse_config(kAbstract, kConfigs);
  std::string other = kAbstract;
  other.replace(other.find("output: out"), 11, "output: elsewhere");
  const auto b = parse_config(other, kConfigs);
  EXPECT_EQ(config_digest(a), config_digest(b));
  std::string seeded = kAbstract;
  seeded.replace(seeded.find("seed: 3"), 7, "seed: 4");
  EXPECT_NE(config_digest(a), config_digest(parse_config(seeded, kConfigs)));
  EXPECT_EQ(content_digest(""), "cbf29ce484222325");
  EXPECT_EQ(content_digest("a"), "af63dc4c8601ec8c");
}

TEST(Coefficient, ParseErrorsCarryLine) {
  const std::string bad = "dimension 1\nshape 1 1\nnu 1\nmode 0 : 2\nmode 1 : zz\n";
  const std::string msg = message_of([&] { parse_coefficient(bad, "bad.coef"); });
  EXPECT_NE(msg.find("bad.coef:5:"), std::string::npos) << msg;
  EXPECT_THROW(parse_coefficient("dimension 1\nshape 1 1\nmode 0 : 1\n"), InputError);
  EXPECT_THROW(parse_coefficient("dimension 1\nshape 1 1\nnu 1\nmode 0 : 1 2\n"), InputError);
  EXPECT_THROW(parse_coefficient("dimension 1\nshape 1 1\nnu 1\nmode 0 0 : 1\n"), InputError);
}

TEST(Coefficient, FormatRoundTrips) {
  const auto lam = load_coefficient(kConfigs / "coefficients" / "laminate_1d.coef");
  EXPECT_EQ(lam.declared_nu, 1.0);
  EXPECT_TRUE(lam.real_valued);
  EXPECT_EQ(lam.mode({1, 0, 0})(0, 0), Complex(0.5));
  const auto c = fourier::random_coefficient(4, 2, 2, 1, 0.5, false);
  const auto back = parse_coefficient(format_coefficient(c));
  EXPECT_EQ(back.modes.size(), c.modes.size());
  for (const auto& [w, m] : c.modes) EXPECT_EQ(back.mode(w), m);
  EXPECT_EQ(back.declared_nu, c.declared_nu);
  EXPECT_EQ(format_coefficient(back), format_coefficient(c));
}

TEST(Output, CsvHeaderAndNumbers) {
  SweepResult r;
  SweepRow row;
  row.theta = {0.5};
  row.eps = 0.1;
  row.err = 1.0 / 3.0;
  r.rows.push_back(row);
  const std::string csv = sweep_csv(r, 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "theta_1,theta_2,eps,err_opnorm,bound,verdict,c,M_norm,C_R,kappa,n_trunc,cond_max");
  EXPECT_NE(csv.find("0.33333333333333331"), std::string::npos);
  EXPECT_NE(csv.find(",nan,"), std::string::npos);
  EXPECT_EQ(format_double(1e300 * 1e300), "inf");
}

TEST(Output, AtomicWriteReplaces) {
  const auto dir = scratch("atomic");
  write_atomic(dir / "f.txt", "one");
  write_atomic(dir / "f.txt", "two");
  EXPECT_EQ(slurp(dir / "f.txt"), "two");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir)) files += e.is_regular_file();
  EXPECT_EQ(files, 1u);
}

TEST(Cache, HitsReturnIdenticalBits) {
  const auto dir = scratch("cache");
  const auto a = fourier::random_coefficient(5, 2, 2, 1, 0.7, true);
  const fourier::ModeSet ms(2, 1, 2);
  const fourier::Theta theta({0.3, -1.9});
  AhomCache cache(dir, content_digest(format_coefficient(a)));
  const CMatrix first = cache.get(a, ms, theta);
  const CMatrix second = cache.get(a, ms, theta);
  EXPECT_EQ(cache.misses(), 1);
  EXPECT_EQ(cache.hits(), 1);
  EXPECT_EQ(first, second);
  EXPECT_EQ(first, cell::assemble_ahom(a, ms, theta).entries);
  EXPECT_TRUE(fs::exists(cache.path_for(ms, theta)));
  AhomCache other(dir, "another");
  other.get(a, ms, theta);
  EXPECT_EQ(other.misses(), 1);
}

TEST(Run, AbstractIsDeterministic) {
  const auto dir = scratch("run");
  std::string text = kAbstract;
  text.replace(text.find("output: out"), 11, "output: first");
  auto cfg = parse_config(text, dir);
  const auto one = run(cfg);
  cfg.out_dir = dir / "second";
  const auto two = run(cfg);
  EXPECT_TRUE(one.all_pass());
  EXPECT_EQ(one.digest, two.digest);
  for (const auto& e : fs::directory_iterator(dir / "first")) {
    const auto name = e.path().filename();
    EXPECT_EQ(slurp(e.path()), slurp(dir / "second" / name)) << name;
  }
  EXPECT_TRUE(fs::exists(dir / "first" / "summary.json"));
  EXPECT_NE(slurp(dir / "first" / "summary.json").find("\"all_pass\": true"), std::string::npos);
}
