#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "heal/heal.h"

namespace {

struct Owned {
  heal_hypergraph* h = nullptr;
  ~Owned() { heal_hypergraph_destroy(h); }
};

struct Text {
  char* p = nullptr;
  ~Text() { heal_string_free(p); }
};

// Nodes 0..3: pairs 01, 12 and the triple 023.
heal_status make_small(heal_hypergraph** out) {
  const size_t offsets[] = {0, 2, 4, 7};
  const size_t members[] = {0, 1, 1, 2, 0, 2, 3};
  return heal_hypergraph_create(4, 3, offsets, members, out);
}

}  // namespace

TEST(CApi, CreateQueryAndSerialise) {
  Owned g;
  ASSERT_EQ(make_small(&g.h), HEAL_OK);
  size_t n = 0, m = 0;
  ASSERT_EQ(heal_hypergraph_counts(g.h, &n, &m), HEAL_OK);
  EXPECT_EQ(n, 4u);
  EXPECT_EQ(m, 3u);
  std::vector<size_t> dv(n), de(m);
  ASSERT_EQ(heal_hypergraph_degrees(g.h, dv.data(), de.data()), HEAL_OK);
  EXPECT_EQ(dv, (std::vector<size_t>{2, 2, 2, 1}));
  EXPECT_EQ(de, (std::vector<size_t>{2, 2, 3}));

  Text t;
  ASSERT_EQ(heal_hypergraph_to_text(g.h, &t.p), HEAL_OK);
  Owned back;
  ASSERT_EQ(heal_hypergraph_parse(t.p, &back.h), HEAL_OK);
  Text t2;
  ASSERT_EQ(heal_hypergraph_to_text(back.h, &t2.p), HEAL_OK);
  EXPECT_STREQ(t.p, t2.p);
}

TEST(CApi, SpectrumAndLaplacian) {
  Owned g;
  ASSERT_EQ(make_small(&g.h), HEAL_OK);
  std::vector<double> eig(4), lap(16);
  ASSERT_EQ(heal_spectrum(g.h, "node", eig.data(), eig.size()), HEAL_OK);
  EXPECT_NEAR(eig[0], 0.0, 1e-12);
  EXPECT_GT(eig[1], 1e-6);
  ASSERT_EQ(heal_laplacian(g.h, "node", lap.data(), lap.size()), HEAL_OK);
  double trace = 0.0, sum = 0.0;
  for (size_t i = 0; i < 4; ++i) trace += lap[i * 4 + i];
  for (double e : eig) sum += e;
  EXPECT_NEAR(trace, sum, 1e-12);
  EXPECT_EQ(heal_laplacian(g.h, "node", lap.data(), 3), HEAL_ERR_RANGE);
  EXPECT_EQ(heal_spectrum(g.h, "face", eig.data(), eig.size()), HEAL_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::strlen(heal_last_error()), 0u);
}

TEST(CApi, CheegerJson) {
  Owned g;
  ASSERT_EQ(heal_hypergraph_parse("nodes=5 edges=3\n0 1 2\n2 3 4\n0 3 4\n", &g.h), HEAL_OK);
  Text j;
  ASSERT_EQ(heal_cheeger_json(g.h, &j.p), HEAL_OK);
  const std::string s = j.p;
  EXPECT_NE(s.find("\"phi\""), std::string::npos);
  EXPECT_NE(s.find("\"lambda1\""), std::string::npos);
  EXPECT_NE(s.find("\"holds\":true"), std::string::npos);

  Owned mixed;
  ASSERT_EQ(make_small(&mixed.h), HEAL_OK);
  Text k;
  EXPECT_EQ(heal_cheeger_json(mixed.h, &k.p), HEAL_ERR_INVALID_ARGUMENT);
}

TEST(CApi, ErrorsAreReported) {
  Owned g;
  const size_t offsets[] = {0, 2};
  const size_t members[] = {0, 7};
  EXPECT_EQ(heal_hypergraph_create(3, 1, offsets, members, &g.h), HEAL_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(g.h, nullptr);
  EXPECT_EQ(heal_hypergraph_parse(nullptr, &g.h), HEAL_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(heal_hypergraph_load("/nonexistent/h.txt", &g.h), HEAL_ERR_IO);
  EXPECT_EQ(heal_run_command("heterophily", "{\"levels\": \"0\"}", nullptr, nullptr), HEAL_ERR_RANGE);
  EXPECT_EQ(heal_run_command("nosuch", nullptr, nullptr, nullptr), HEAL_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(make_small(&g.h), HEAL_OK);
  EXPECT_STREQ(heal_last_error(), "");
}

TEST(CApi, GenerateAndRunCommand) {
  Owned g;
  ASSERT_EQ(heal_generate("hes", 4, 1, 3, &g.h), HEAL_OK);
  size_t n = 0;
  ASSERT_EQ(heal_hypergraph_counts(g.h, &n, nullptr), HEAL_OK);
  EXPECT_GT(n, 0u);
  EXPECT_EQ(heal_generate("hex", 4, 1, 3, &g.h), HEAL_ERR_INVALID_ARGUMENT);

  Text defaults;
  ASSERT_EQ(heal_command_defaults("diffuse", &defaults.p), HEAL_OK);
  EXPECT_NE(std::string(defaults.p).find("\"dt\""), std::string::npos);

  Text text, summary;
  ASSERT_EQ(heal_run_command("generate", "{\"topology\": \"her\", \"n\": 3, \"m\": 2}", &text.p, &summary.p), HEAL_OK);
  EXPECT_EQ(std::string(text.p).rfind("nodes=", 0), 0u);
  EXPECT_NE(std::string(summary.p).find("required_depth"), std::string::npos);
}

TEST(CApi, VersionIsSet) { EXPECT_GT(std::strlen(heal_version()), 0u); }
