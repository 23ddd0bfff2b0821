#include <filesystem>

#include "doctest.h"
#include "rosdyn/market.hpp"
#include "rosdyn/rng.hpp"

using namespace rosdyn;

namespace {

MarketInstance two_bidder_fixed() {
  MarketInstance inst;
  inst.bidder_names = {"a", "b"};
  ItemSpec i1;
  i1.values["a"] = ValueSpec::fixed(2.0);
  i1.values["b"] = ValueSpec::fixed(1.0);
  ItemSpec i2;
  i2.values["a"] = ValueSpec::fixed(1.0);
  i2.values["b"] = ValueSpec::fixed(2.0);
  inst.items = {i1, i2};
  return inst;
}

MarketInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nb(1, 4), ni(0, 5), kind(0, 2), ab(1, 9);
  std::uniform_real_distribution<double> val(0.0, 10.0), sc(0.1, 5.0), lam(0.0, 1.0);
  MarketInstance inst;
  inst.lambda = lam(rng);
  const int n = nb(rng);
  for (int i = 0; i < n; ++i) inst.bidder_names.push_back("bidder" + std::to_string(i));
  const int items = ni(rng);
  for (int j = 0; j < items; ++j) {
    ItemSpec item;
    bool smooth = false;
    for (int i = 0; i < n; ++i) {
      const int k = kind(rng);
      if (k == 0) continue;
      if (k == 1) item.values[inst.bidder_names[i]] = ValueSpec::fixed(val(rng));
      if (k == 2) {
        item.values[inst.bidder_names[i]] = ValueSpec::beta(ab(rng), ab(rng), sc(rng));
        smooth = true;
      }
    }
    if (item.values.empty()) item.values[inst.bidder_names[0]] = ValueSpec::fixed(val(rng));
    if (!smooth) {
      item.reserve = val(rng) < 3.0 ? 0.5 : 0.0;
      if (val(rng) < 3.0) item.tie_break = TieBreak::favor(item.values.begin()->first);
      std::uniform_real_distribution<double> cp(0.5, 4.0);
      item.copies = cp(rng);
    }
    inst.items.push_back(std::move(item));
  }
  return inst;
}

}  // namespace

TEST_CASE("value spec invariants") {
  CHECK_THROWS(ValueSpec::fixed(-1.0));
  CHECK_THROWS(ValueSpec::beta(0, 3));
  CHECK_THROWS(ValueSpec::beta(3, 0));
  CHECK_THROWS(ValueSpec::beta(2, 2, 0.0));
  const auto b = ValueSpec::beta(2, 1, 3.0);
  CHECK(b.mean() == doctest::Approx(2.0));
  CHECK(b.support_max() == 3.0);
}

TEST_CASE("normalize_targets") {
  // one bidder, two items: row divided by its target
  CHECK(normalize_targets({{4.0, 2.0}}, {2.0}) ==
        std::vector<std::vector<double>>{{2.0, 1.0}});
  // all-ones targets leave values unchanged
  const std::vector<std::vector<double>> v{{3.0, 1.0}, {2.0, 5.0}};
  CHECK(normalize_targets(v, {1.0, 1.0}) == v);
  CHECK(normalize_targets({{3.0}, {5.0}}, {3.0, 5.0}) ==
        std::vector<std::vector<double>>{{1.0}, {1.0}});
  CHECK_THROWS_WITH_AS(static_cast<void>(normalize_targets({{1.0}, {1.0}}, {1.0, 0.0})),
                       doctest::Contains("bidder 1"), std::invalid_argument);
}

TEST_CASE("validate_instance catches the named violations") {
  auto inst = two_bidder_fixed();
  CHECK(validate_instance(inst).empty());

  SUBCASE("item with no interested bidder") {
    inst.items[0].values["a"] = ValueSpec::zero();
    inst.items[0].values["b"] = ValueSpec::zero();
    const auto report = validate_instance(inst);
    REQUIRE(!report.empty());
    CHECK(describe(report[0]).find("no interested bidder") != std::string::npos);
  }
  SUBCASE("smooth item with nonzero reserve") {
    inst.items[0].values["a"] = ValueSpec::beta(2, 1);
    inst.items[0].reserve = 0.5;
    const auto report = validate_instance(inst);
    REQUIRE(!report.empty());
    CHECK(describe(report[0]).find("smooth item with nonzero reserve") != std::string::npos);
  }
  SUBCASE("smooth item with directed tie-break") {
    inst.items[0].values["a"] = ValueSpec::beta(2, 1);
    inst.items[0].tie_break = TieBreak::favor("a");
    CHECK(!validate_instance(inst).empty());
  }
  SUBCASE("lambda out of range") {
    inst.lambda = 1.5;
    CHECK(!validate_instance(inst).empty());
  }
  SUBCASE("tie-break must reference an interested bidder") {
    inst.items[0].tie_break = TieBreak::favor("nobody");
    CHECK(!validate_instance(inst).empty());
  }
}

TEST_CASE("instance json round trip and rejection") {
  const auto inst = two_bidder_fixed();
  const auto text = instance_to_json_text(inst);
  CHECK(instance_from_json_text(text) == inst);

  CHECK_THROWS_WITH_AS(
      static_cast<void>(instance_from_json_text(R"({"lambda": 1.5, "bidders": ["a"]})")),
      doctest::Contains("lambda out of [0,1]"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      static_cast<void>(instance_from_json_text(
          R"({"lambda": 1, "bidders": ["a"], "items": [{"values": {"ghost": {"fixed": 1}}}]})")),
      doctest::Contains("missing bidder"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      static_cast<void>(instance_from_json_text(R"({"bidders": ["a"], "extra": 1})")),
      doctest::Contains("unknown field"), std::invalid_argument);
}

TEST_CASE("save/load identity on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "rosdyn_market_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "inst.json").string();
  const auto inst = two_bidder_fixed();
  save_instance(inst, path);
  CHECK(load_instance(path) == inst);
  CHECK(instance_fingerprint(inst) == instance_fingerprint(load_instance(path)));
}

TEST_CASE("1000 randomized valid instances round-trip exactly") {
  auto rng = make_rng(derive_seed(99, "market-roundtrip"));
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto inst = random_instance(rng);
    if (!validate_instance(inst).empty()) continue;
    const auto back = instance_from_json_text(instance_to_json_text(inst));
    REQUIRE(back == inst);
    ++checked;
  }
  CHECK(checked > 800);
}
