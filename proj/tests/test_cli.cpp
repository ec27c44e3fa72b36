#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "padic/cli.hpp"

using padic::run_cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, Eval) {
  const Result r = run({"eval", "-f", "x^2+1", "--at", "3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "10 + O(5^8)\n");
  EXPECT_EQ(run({"eval", "-f", "1/x", "--at", "0"}).code, 3);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"eval"}).code, 2);
  EXPECT_EQ(run({"eval", "-f", "x +"}).code, 2);
  EXPECT_EQ(run({"-p", "9", "eval", "-f", "x"}).code, 2);
  EXPECT_EQ(run({"demo", "nothing"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, JsonAndFallthrough) {
  const Result r = run({"cosets", "-n", "2", "--json", "-p", "3"});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["prime"], 3);
  EXPECT_EQ(j["index"], 4);
}

TEST(Cli, StrictExitCodes) {
  const std::vector<std::string> base{"certify-jacobian", "-f", "x^2", "--ball", "0:0", "-k", "3", "-p", "7"};
  EXPECT_EQ(run(base).code, 0);
  auto strict = base;
  strict.push_back("--strict");
  EXPECT_EQ(run(strict).code, 1);
  EXPECT_EQ(run({"--strict", "certify-jacobian", "-f", "x^2", "--ball", "1:1", "-k", "3", "-p", "7"}).code, 0);
}

TEST(Cli, PathologicalDemo) {
  const Result r = run({"-p", "3", "-s", "4", "--j0", "4", "--jmax", "8", "--strict", "demo", "pathological"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("derivative zero at 10 points: PASS"), std::string::npos);
  EXPECT_NE(r.out.find("(1/9, 1/27, 1/81)"), std::string::npos);
}

TEST(Cli, VerifyCov) {
  const Result r = run({"verify-cov", "-f", "x^2", "--ball", "1:1", "-k", "4", "--json"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out)["difference"], 0);
}
