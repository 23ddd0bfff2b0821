#include "rosdyn/market.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rosdyn/rng.hpp"

namespace rosdyn {

using nlohmann::json;

ValueSpec ValueSpec::fixed(double v) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw std::invalid_argument("fixed value must be finite and >= 0, got " + std::to_string(v));
  ValueSpec s;
  s.kind = Kind::fixed;
  s.value = v;
  return s;
}

ValueSpec ValueSpec::beta(int a, int b, double scale) {
  if (a < 1 || b < 1)
    throw std::invalid_argument("beta parameters must be integers >= 1, got (" +
                                std::to_string(a) + ", " + std::to_string(b) + ")");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("beta scale must be finite and > 0");
  ValueSpec s;
  s.kind = Kind::beta;
  s.beta_a = a;
  s.beta_b = b;
  s.scale = scale;
  return s;
}

double ValueSpec::mean() const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::fixed: return value;
    case Kind::beta: return scale * beta_a / double(beta_a + beta_b);
  }
  return 0.0;
}

double ValueSpec::support_max() const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::fixed: return value;
    case Kind::beta: return scale;
  }
  return 0.0;
}

bool ItemSpec::is_smooth() const {
  for (const auto& [name, v] : values)
    if (v.is_beta()) return true;
  return false;
}

std::optional<std::size_t> MarketInstance::bidder_index(const std::string& name) const {
  for (std::size_t i = 0; i < bidder_names.size(); ++i)
    if (bidder_names[i] == name) return i;
  return std::nullopt;
}

double MarketInstance::total_copies() const {
  double total = 0.0;
  for (const auto& item : items) total += item.copies;
  return total;
}

std::string describe(const Violation& v) {
  std::ostringstream os;
  if (v.item >= 0) os << "item " << v.item << ": ";
  if (!v.bidder.empty()) os << "bidder '" << v.bidder << "': ";
  os << v.message;
  return os.str();
}

std::vector<Violation> validate_instance(const MarketInstance& inst) {
  std::vector<Violation> out;
  auto add = [&out](int item, std::string bidder, std::string msg) {
    out.push_back({item, std::move(bidder), std::move(msg)});
  };

  if (!(inst.lambda >= 0.0 && inst.lambda <= 1.0))
    add(-1, "", "lambda out of [0,1]");

  std::set<std::string> seen;
  for (const auto& name : inst.bidder_names) {
    if (name.empty()) add(-1, name, "empty bidder name");
    if (!seen.insert(name).second) add(-1, name, "duplicate bidder name");
  }

  for (std::size_t j = 0; j < inst.items.size(); ++j) {
    const ItemSpec& item = inst.items[j];
    const int ji = int(j);
    bool any_interest = false;
    bool smooth = false;
    for (const auto& [name, v] : item.values) {
      if (!inst.bidder_index(name))
        add(ji, name, "item references unknown bidder");
      if (!v.is_zero()) any_interest = true;
      if (v.is_beta()) {
        smooth = true;
        if (v.beta_a < 1 || v.beta_b < 1) add(ji, name, "beta parameters must be >= 1");
        if (!(v.scale > 0.0)) add(ji, name, "beta scale must be > 0");
      }
      if (v.is_fixed() && !(v.value >= 0.0)) add(ji, name, "fixed value must be >= 0");
    }
    if (!any_interest) add(ji, "", "item has no interested bidder");
    if (!(item.reserve >= 0.0)) add(ji, "", "reserve must be >= 0");
    if (!(item.copies > 0.0)) add(ji, "", "copies must be > 0");
    if (smooth && item.reserve != 0.0) add(ji, "", "smooth item with nonzero reserve");
    if (smooth && item.tie_break.kind != TieBreak::Kind::uniform_split)
      add(ji, "", "smooth item with directed tie-break");
    if (item.tie_break.kind != TieBreak::Kind::uniform_split) {
      auto it = item.values.find(item.tie_break.bidder);
      if (it == item.values.end() || it->second.is_zero())
        add(ji, item.tie_break.bidder, "tie-break references bidder with no value on the item");
    }
  }
  return out;
}

void require_valid(const MarketInstance& inst) {
  auto report = validate_instance(inst);
  if (report.empty()) return;
  std::ostringstream os;
  os << "invalid market instance:";
  for (const auto& v : report) os << "\n  " << describe(v);
  throw std::invalid_argument(os.str());
}

std::vector<std::vector<double>> normalize_targets(
    const std::vector<std::vector<double>>& raw_values,
    const std::vector<double>& targets) {
  if (raw_values.size() != targets.size())
    throw std::invalid_argument("one target per bidder row required");
  std::vector<std::vector<double>> out = raw_values;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i] > 0.0))
      throw std::invalid_argument("non-positive target for bidder " + std::to_string(i));
    for (double& v : out[i]) v /= targets[i];
  }
  return out;
}

namespace {

json value_spec_to_json(const ValueSpec& v) {
  switch (v.kind) {
    case ValueSpec::Kind::fixed: return json{{"fixed", v.value}};
    case ValueSpec::Kind::beta: return json{{"beta", json::array({v.beta_a, v.beta_b, v.scale})}};
    case ValueSpec::Kind::zero: break;
  }
  return json{{"fixed", 0.0}};
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& ctx) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok) throw std::invalid_argument(ctx + ": unknown field '" + it.key() + "'");
  }
}

ValueSpec value_spec_from_json(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw std::invalid_argument(ctx + ": value spec must be an object");
  reject_unknown_keys(j, {"fixed", "beta"}, ctx);
  if (j.contains("fixed")) {
    if (j.contains("beta")) throw std::invalid_argument(ctx + ": both fixed and beta given");
    return ValueSpec::fixed(j.at("fixed").get<double>());
  }
  if (j.contains("beta")) {
    const json& arr = j.at("beta");
    if (!arr.is_array() || arr.size() < 2 || arr.size() > 3)
      throw std::invalid_argument(ctx + ": beta must be [a, b] or [a, b, scale]");
    double scale = arr.size() == 3 ? arr[2].get<double>() : 1.0;
    return ValueSpec::beta(arr[0].get<int>(), arr[1].get<int>(), scale);
  }
  throw std::invalid_argument(ctx + ": value spec needs 'fixed' or 'beta'");
}

json tie_break_to_json(const TieBreak& t) {
  switch (t.kind) {
    case TieBreak::Kind::uniform_split: return json("uniform");
    case TieBreak::Kind::favor: return json{{"favor", t.bidder}};
    case TieBreak::Kind::disfavor: return json{{"disfavor", t.bidder}};
  }
  return json("uniform");
}

TieBreak tie_break_from_json(const json& j, const std::string& ctx) {
  if (j.is_string()) {
    if (j.get<std::string>() == "uniform") return TieBreak::uniform();
    throw std::invalid_argument(ctx + ": unknown tie_break '" + j.get<std::string>() + "'");
  }
  if (j.is_object()) {
    reject_unknown_keys(j, {"favor", "disfavor"}, ctx);
    if (j.contains("favor") && !j.contains("disfavor"))
      return TieBreak::favor(j.at("favor").get<std::string>());
    if (j.contains("disfavor") && !j.contains("favor"))
      return TieBreak::disfavor(j.at("disfavor").get<std::string>());
  }
  throw std::invalid_argument(ctx + ": tie_break must be \"uniform\", {\"favor\": name} or {\"disfavor\": name}");
}

}  // namespace

std::string instance_to_json_text(const MarketInstance& inst) {
  json j;
  j["lambda"] = inst.lambda;
  j["bidders"] = inst.bidder_names;
  json items = json::array();
  for (const auto& item : inst.items) {
    json ji;
    json values = json::object();
    for (const auto& [name, v] : item.values)
      if (!v.is_zero()) values[name] = value_spec_to_json(v);
    ji["values"] = values;
    if (item.reserve != 0.0) ji["reserve"] = item.reserve;
    if (item.tie_break.kind != TieBreak::Kind::uniform_split)
      ji["tie_break"] = tie_break_to_json(item.tie_break);
    if (item.copies != 1.0) ji["copies"] = item.copies;
    items.push_back(std::move(ji));
  }
  j["items"] = std::move(items);
  return j.dump(2);
}

MarketInstance instance_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("instance parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("instance file must hold a JSON object");
  reject_unknown_keys(j, {"lambda", "bidders", "items"}, "instance");

  MarketInstance inst;
  inst.lambda = j.value("lambda", 1.0);
  if (!(inst.lambda >= 0.0 && inst.lambda <= 1.0))
    throw std::invalid_argument("lambda out of [0,1]");
  if (!j.contains("bidders") || !j.at("bidders").is_array())
    throw std::invalid_argument("instance needs a 'bidders' array");
  for (const auto& b : j.at("bidders")) inst.bidder_names.push_back(b.get<std::string>());

  if (j.contains("items")) {
    const json& items = j.at("items");
    if (!items.is_array()) throw std::invalid_argument("'items' must be an array");
    for (std::size_t k = 0; k < items.size(); ++k) {
      const std::string ctx = "item " + std::to_string(k);
      const json& ji = items[k];
      if (!ji.is_object()) throw std::invalid_argument(ctx + ": must be an object");
      reject_unknown_keys(ji, {"values", "reserve", "tie_break", "copies"}, ctx);
      ItemSpec item;
      if (!ji.contains("values") || !ji.at("values").is_object())
        throw std::invalid_argument(ctx + ": needs a 'values' object");
      for (auto it = ji.at("values").begin(); it != ji.at("values").end(); ++it) {
        if (!inst.bidder_index(it.key()))
          throw std::invalid_argument(ctx + ": references missing bidder '" + it.key() + "'");
        item.values[it.key()] = value_spec_from_json(it.value(), ctx + ", bidder '" + it.key() + "'");
      }
      item.reserve = ji.value("reserve", 0.0);
      if (ji.contains("tie_break")) item.tie_break = tie_break_from_json(ji.at("tie_break"), ctx);
      item.copies = ji.value("copies", 1.0);
      if (!(item.copies > 0.0)) throw std::invalid_argument(ctx + ": copies must be > 0");
      inst.items.push_back(std::move(item));
    }
  }
  return inst;
}

MarketInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return instance_from_json_text(buf.str());
  } catch (const std::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void save_instance(const MarketInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << instance_to_json_text(inst) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::uint64_t instance_fingerprint(const MarketInstance& inst) {
  return fnv1a64(instance_to_json_text(inst));
}

}  // namespace rosdyn
