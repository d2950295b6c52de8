#include "doctest.h"
#include "support.hpp"

#include "pahomeo/cli.hpp"
#include "pahomeo/io.hpp"

#include <fstream>
#include <sstream>

using namespace pahomeo;
using testing_support::TempDir;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "pahomeo");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::vector<std::string> polygons(const std::string& svg, const std::string& group) {
  const auto start = svg.find("<g class=\"" + group + "\"");
  const auto end = svg.find("</g>", start);
  std::vector<std::string> out;
  std::istringstream lines(svg.substr(start, end - start));
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("<polygon", 0) == 0) out.push_back(line);
  }
  return out;
}

}  // namespace

TEST_CASE("block command") {
  TempDir dir("cli_block");
  const std::string base = dir.file("id4");
  const Run r = run({"block", "--a", "1", "--b", "0", "--c", "0", "--d", "1", "--k", "4", "--out", base});
  CHECK(r.code == kExitOk);
  CHECK(contains(r.out, "7/32"));
  CHECK(contains(r.out, "21/32"));
  CHECK(contains(r.out, "all block identities hold"));
  CHECK(contains(r.out, "FAILS  (informational)"));

  const Json j = read_json_file(base + ".block.json");
  CHECK(j["spec"]["k"] == 4);
  CHECK(block_json(block_from_json(j)).dump() == j.dump());

  const Run v = run({"verify", "--in", base + ".block.json"});
  CHECK(v.code == kExitOk);
  CHECK(contains(v.out, "stored report reproduced exactly"));

  // Negative entries pass through as values.
  CHECK(run({"block", "--a", "1", "--b", "-1", "--c", "1", "--d", "1", "--k", "2", "--out", dir.file("neg")}).code ==
        kExitOk);
}

TEST_CASE("block command input errors") {
  TempDir dir("cli_block_err");
  const std::string out = dir.file("x");
  CHECK(run({"block", "--a", "1", "--b", "0", "--c", "0", "--d", "-1", "--k", "3", "--out", out}).code == kExitInput);
  CHECK(run({"block", "--a", "1/0", "--b", "0", "--c", "0", "--d", "1", "--k", "3", "--out", out}).code == kExitInput);
  CHECK(run({"block", "--a", "one", "--b", "0", "--c", "0", "--d", "1", "--k", "3", "--out", out}).code == kExitInput);
  CHECK(run({"block", "--a", "1", "--b", "0", "--c", "0", "--d", "1", "--k", "1", "--out", out}).code == kExitInput);
  CHECK(run({"block", "--a", "1", "--b", "0", "--c", "0", "--d", "1", "--k", "13", "--out", out}).code == kExitInput);
  CHECK(run({"block", "--a", "1", "--k", "3"}).code == kExitInput);
}

TEST_CASE("verify detects a tampered block file") {
  TempDir dir("cli_tamper");
  const std::string base = dir.file("b");
  REQUIRE(run({"block", "--a", "2", "--b", "1", "--c", "1", "--d", "1", "--k", "2", "--out", base}).code == kExitOk);
  Json j = read_json_file(base + ".block.json");
  j["report"]["energy_phi"] = "1/1";
  write_json_file(dir.file("t.block.json"), j);
  CHECK(run({"verify", "--in", dir.file("t.block.json")}).code == kExitCheck);

  Json moved = read_json_file(base + ".block.json");
  moved["phi"]["vertices"][3][1] = "1/7";
  write_json_file(dir.file("m.block.json"), moved);
  CHECK(run({"verify", "--in", dir.file("m.block.json")}).code == kExitInput);

  std::ofstream(dir.file("broken.json")) << "{ not json";
  CHECK(run({"verify", "--in", dir.file("broken.json")}).code == kExitInput);
  CHECK(run({"verify", "--in", dir.file("missing.json")}).code == kExitInput);
}

TEST_CASE("render command") {
  TempDir dir("cli_render");
  const std::string base = dir.file("b");
  REQUIRE(run({"block", "--a", "1", "--b", "0", "--c", "0", "--d", "1", "--k", "2", "--out", base}).code == kExitOk);
  const std::string in = base + ".block.json";

  REQUIRE(run({"render", "--in", in, "--out", dir.file("d.svg")}).code == kExitOk);
  const std::string domain = slurp(dir.file("d.svg"));
  CHECK(count(domain, "<polygon") == 160);
  CHECK(contains(domain, "<svg"));

  REQUIRE(run({"render", "--in", in, "--out", dir.file("d2.svg")}).code == kExitOk);
  CHECK(slurp(dir.file("d2.svg")) == domain);

  REQUIRE(run({"render", "--in", in, "--mode", "side-by-side", "--highlight", "--out", dir.file("s.svg")}).code ==
          kExitOk);
  const std::string sbs = slurp(dir.file("s.svg"));
  CHECK(count(sbs, "<polygon") == 320);
  CHECK(contains(sbs, "<g class=\"domain\""));
  CHECK(contains(sbs, "<g class=\"image\" transform=\"translate("));
  CHECK(count(sbs, "fill=\"#c8553d\"") == 2 * 16);  // the R' cells in both panels

  // The identity draws the same picture in both modes.
  write_json_file(dir.file("id.json"), to_json(identity_two_triangles()));
  REQUIRE(run({"render", "--in", dir.file("id.json"), "--mode", "domain", "--out", dir.file("a.svg")}).code == kExitOk);
  REQUIRE(run({"render", "--in", dir.file("id.json"), "--mode", "image", "--out", dir.file("b.svg")}).code == kExitOk);
  CHECK(polygons(slurp(dir.file("a.svg")), "domain") == polygons(slurp(dir.file("b.svg")), "image"));

  CHECK(run({"render", "--in", in, "--mode", "sideways"}).code == kExitInput);
  CHECK(run({"render", "--in", in, "--scale", "0", "--out", dir.file("z.svg")}).code == kExitInput);
}

TEST_CASE("certify command") {
  TempDir dir("cli_certify");
  REQUIRE(run({"block", "--a", "1", "--b", "0", "--c", "0", "--d", "1", "--k", "2", "--out", dir.file("k2")}).code ==
          kExitOk);
  const Run fail = run({"certify", "--in", dir.file("k2.block.json"), "--n", "2"});
  CHECK(fail.code == kExitCheck);
  CHECK(contains(fail.out, "32 disjoint open triangles"));

  REQUIRE(run({"block", "--a", "1", "--b", "0", "--c", "0", "--d", "1", "--k", "5", "--out", dir.file("k5")}).code ==
          kExitOk);
  const Run ok = run({"certify", "--in", dir.file("k5.block.json"), "--n", "3"});
  CHECK(ok.code == kExitOk);
  CHECK(contains(ok.out, "23/125"));
  CHECK(contains(ok.out, "92/125"));

  write_json_file(dir.file("id.json"), to_json(identity_two_triangles()));
  CHECK(run({"certify", "--in", dir.file("id.json"), "--n", "3"}).code == kExitInput);
}

TEST_CASE("densify command") {
  TempDir dir("cli_densify");
  const std::string base = dir.file("d");
  const Run r = run({"densify", "--g", "identity", "--n", "3", "--eps", "1/2", "--M", "4", "--out", base});
  CHECK(r.code == kExitOk);
  const Json j = read_json_file(base + ".densify.json");
  CHECK(j["certificate"]["in_A_n"] == true);
  CHECK(densify_json(densify_from_json(j)).dump() == j.dump());
  CHECK(run({"verify", "--in", base + ".densify.json"}).code == kExitOk);
  CHECK(run({"certify", "--in", base + ".densify.json", "--n", "3"}).code == kExitOk);

  write_json_file(dir.file("star.json"), to_json(star_homeomorphism({Rational(3, 5), Rational(2, 5)})));
  CHECK(run({"densify", "--g", dir.file("star.json"), "--n", "2", "--eps", "1/2", "--M", "4", "--out",
             dir.file("s")})
            .code == kExitOk);

  CHECK(run({"densify", "--g", "identity", "--n", "3", "--M", "2", "--out", base}).code == kExitInput);
  CHECK(run({"densify", "--g", "identity", "--n", "1", "--out", base}).code == kExitInput);
  CHECK(run({"densify", "--g", "identity", "--n", "3", "--eps", "0", "--out", base}).code == kExitInput);

  const PwaMap star = star_homeomorphism({Rational(1, 2), Rational(1, 2)});
  std::vector<Point2> values = vertex_values(star);
  values[8] = {Rational(3, 2), Rational(1, 2)};
  write_json_file(dir.file("folded.json"), to_json(from_vertex_values(star.mesh, values)));
  CHECK(run({"densify", "--g", dir.file("folded.json"), "--n", "3", "--out", base}).code == kExitInput);

  const PwaMap far = star_homeomorphism({Rational(9, 10), Rational(1, 10)});
  write_json_file(dir.file("far.json"), to_json(far));
  CHECK(run({"densify", "--g", dir.file("far.json"), "--n", "3", "--M", to_string(energy(far)), "--out", base})
            .code == kExitInput);
}

TEST_CASE("demo command") {
  CHECK(run({"demo", "--depth", "0"}).code == kExitOk);
  CHECK(run({"demo", "--depth", "9"}).code == kExitInput);
  const Run r = run({"demo", "--depth", "1"});
  CHECK(r.code == kExitOk);
  CHECK(contains(r.out, "all bounds hold"));
}

TEST_CASE("top-level usage") {
  CHECK(run({}).code == kExitInput);
  CHECK(run({"frobnicate"}).code == kExitInput);
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({"block", "--help"}).code == kExitOk);
}
