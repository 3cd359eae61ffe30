#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "rissim/harness.hpp"

namespace rissim {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

// section name -> key -> (value, line)
using SectionMap = std::map<std::string, std::map<std::string, Entry>>;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
  std::ostringstream os;
  os << name << ":" << line << ": " << msg;
  throw ParseError(os.str());
}

SectionMap tokenize(const std::string& text, const std::string& name) {
  SectionMap sections;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(name, line, "unterminated section header");
      current = trim(s.substr(1, s.size() - 2));
      if (current.empty()) fail(name, line, "empty section name");
      sections[current];  // a section may legitimately be empty
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos) fail(name, line, "expected key = value");
    if (current.empty()) fail(name, line, "key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(name, line, "empty key");
    auto [it, inserted] = sections[current].emplace(key, Entry{value, line});
    if (!inserted) {
      fail(name, line,
           "duplicate key '" + key + "' (first seen on line " +
               std::to_string(it->second.line) + ")");
    }
  }
  return sections;
}

// typed readers over one section; every consumed key is crossed off so that
// leftovers can be reported as unknown
struct Section {
  const std::string& file;
  std::string name;
  std::map<std::string, Entry> entries;

  std::optional<Entry> take(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    Entry e = it->second;
    entries.erase(it);
    return e;
  }

  double number(const std::string& key, double fallback) {
    auto e = take(key);
    if (!e) return fallback;
    try {
      size_t used = 0;
      const double v = std::stod(e->value, &used);
      if (used != e->value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      fail(file, e->line, "cannot parse number for '" + key + "': " + e->value);
    }
  }

  long integer(const std::string& key, long fallback) {
    auto e = take(key);
    if (!e) return fallback;
    try {
      size_t used = 0;
      const long v = std::stol(e->value, &used);
      if (used != e->value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      fail(file, e->line, "cannot parse integer for '" + key + "': " + e->value);
    }
  }

  uint64_t unsigned64(const std::string& key, uint64_t fallback) {
    auto e = take(key);
    if (!e) return fallback;
    try {
      size_t used = 0;
      const uint64_t v = std::stoull(e->value, &used);
      if (used != e->value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      fail(file, e->line, "cannot parse unsigned for '" + key + "': " + e->value);
    }
  }

  std::string word(const std::string& key, const std::string& fallback) {
    auto e = take(key);
    return e ? e->value : fallback;
  }

  std::vector<double> numbers(const std::string& key) {
    auto e = take(key);
    if (!e) return {};
    std::vector<double> out;
    std::istringstream is(e->value);
    double v;
    while (is >> v) out.push_back(v);
    if (!is.eof()) fail(file, e->line, "cannot parse number list for '" + key + "'");
    return out;
  }

  Eigen::Vector3d position(const std::string& key, const Eigen::Vector3d& fallback) {
    auto e = take(key);
    if (!e) return fallback;
    std::istringstream is(e->value);
    Eigen::Vector3d v;
    if (!(is >> v.x() >> v.y() >> v.z())) {
      fail(file, e->line, "'" + key + "' needs three coordinates");
    }
    return v;
  }

  void finish() {
    if (!entries.empty()) {
      const auto& [key, e] = *entries.begin();
      fail(file, e.line, "unknown key '" + key + "' in section [" + name + "]");
    }
  }
};

Section pick(SectionMap& sections, const std::string& file, const std::string& name) {
  Section s{file, name, {}};
  auto it = sections.find(name);
  if (it != sections.end()) {
    s.entries = std::move(it->second);
    sections.erase(it);
  }
  return s;
}

ChannelGenParams channel_params_from(Section& sec, const ChannelGenParams& base) {
  ChannelGenParams p = base;
  const std::string model = sec.word("model", p.model == FadingModel::kRician
                                                  ? "rician"
                                                  : "rayleigh");
  if (model == "rician") {
    p.model = FadingModel::kRician;
  } else if (model == "rayleigh") {
    p.model = FadingModel::kRayleigh;
  } else {
    throw ParseError(sec.file + ": unknown fading model '" + model + "'");
  }
  p.rician_k = sec.number("rician_k", p.rician_k);
  p.pathloss_exponent = sec.number("pathloss_exponent", p.pathloss_exponent);
  p.reference_loss_db = sec.number("reference_loss_db", p.reference_loss_db);
  p.carrier_wavelength = sec.number("carrier_wavelength", p.carrier_wavelength);
  return p;
}

std::vector<Eigen::Vector3d> parse_waypoints(Section& sec, const std::string& key) {
  auto e = sec.take(key);
  if (!e) return {};
  std::vector<Eigen::Vector3d> out;
  std::istringstream groups(e->value);
  std::string group;
  while (std::getline(groups, group, ';')) {
    group = trim(group);
    if (group.empty()) continue;
    std::istringstream is(group);
    Eigen::Vector3d v;
    if (!(is >> v.x() >> v.y() >> v.z())) {
      fail(sec.file, e->line, "'" + key + "' waypoints need three coordinates each");
    }
    out.push_back(v);
  }
  return out;
}

Eigen::MatrixXd parse_matrix(Section& sec, const std::string& key) {
  auto e = sec.take(key);
  if (!e) return {};
  std::vector<std::vector<double>> rows;
  std::istringstream lines(e->value);
  std::string part;
  while (std::getline(lines, part, ';')) {
    part = trim(part);
    if (part.empty()) continue;
    std::istringstream is(part);
    std::vector<double> row;
    double v;
    while (is >> v) row.push_back(v);
    rows.push_back(row);
  }
  if (rows.empty()) return {};
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) {
      fail(sec.file, e->line, "'" + key + "' rows have inconsistent lengths");
    }
    for (size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

}  // namespace

ParsedScenario parse_scenario_text(const std::string& text, const std::string& name) {
  SectionMap sections = tokenize(text, name);
  ParsedScenario out;
  Scenario& sc = out.scenario;

  {
    Section sec = pick(sections, name, "scenario");
    sc.bs_antennas = static_cast<int>(sec.integer("bs_antennas", sc.bs_antennas));
    sc.num_terminals = static_cast<int>(sec.integer("terminals", sc.num_terminals));
    sc.power_budget = sec.number("power_budget", sc.power_budget);
    sc.seed = sec.unsigned64("seed", sc.seed);
    sc.active_antennas = static_cast<int>(sec.integer("active_antennas", 0));
    sc.bs_position = sec.position("bs_position", sc.bs_position);
    sc.weights = sec.numbers("weights");
    sec.finish();
  }
  if (sc.weights.empty()) {
    sc.weights.assign(static_cast<size_t>(std::max(sc.num_terminals, 0)), 1.0);
  }
  {
    Section sec = pick(sections, name, "channel");
    sc.channel_params = channel_params_from(sec, sc.channel_params);
    sec.finish();
  }

  for (int n = 0;; ++n) {
    const std::string key = "ris." + std::to_string(n);
    if (!sections.count(key)) break;
    Section sec = pick(sections, name, key);
    RisPanel r;
    r.elements = static_cast<int>(sec.integer("elements", r.elements));
    const std::string kind = sec.word("feasibility", "continuous");
    if (kind == "general") {
      r.feasibility.kind = FeasibilityKind::kGeneral;
    } else if (kind == "continuous") {
      r.feasibility.kind = FeasibilityKind::kContinuousPhase;
    } else if (kind == "discrete") {
      r.feasibility.kind = FeasibilityKind::kDiscretePhase;
    } else {
      throw ParseError(name + ": unknown feasibility '" + kind + "'");
    }
    r.feasibility.tau = static_cast<int>(sec.integer("tau", r.feasibility.tau));
    r.cluster_budget = static_cast<int>(sec.integer("cluster_budget", r.elements));
    r.position = sec.position("position", {10.0, 0.0, 5.0});
    sec.finish();
    sc.ris.push_back(r);
  }

  for (int k = 0; k < sc.num_terminals; ++k) {
    const std::string key = "terminal." + std::to_string(k);
    Terminal t;
    t.position = {20.0 + 3.0 * k, 4.0 * k - 2.0, 1.5};
    if (sections.count(key)) {
      Section sec = pick(sections, name, key);
      t.position = sec.position("position", t.position);
      t.noise_power = sec.number("noise_power", t.noise_power);
      t.sinr_target = sec.number("sinr_target", t.sinr_target);
      t.constellation =
          Constellation::psk(static_cast<int>(sec.integer("constellation", 4)));
      sec.finish();
    }
    sc.terminals.push_back(t);
  }

  if (sections.count("eavesdropper")) {
    Section sec = pick(sections, name, "eavesdropper");
    Eavesdropper e;
    e.antennas = static_cast<int>(sec.integer("antennas", e.antennas));
    e.noise_power = sec.number("noise_power", e.noise_power);
    e.position = sec.position("position", {15.0, 0.0, 1.5});
    sec.finish();
    sc.eavesdropper = e;
  }

  {
    Section sec = pick(sections, name, "mobility");
    const std::string kind = sec.word("kind", "static");
    if (kind == "static") {
      out.mobility.kind = MobilityKind::kStatic;
    } else if (kind == "stochastic") {
      out.mobility.kind = MobilityKind::kStochastic;
    } else if (kind == "steerable") {
      out.mobility.kind = MobilityKind::kSteerable;
    } else if (kind == "predictable") {
      out.mobility.kind = MobilityKind::kPredictable;
    } else if (kind == "hybrid") {
      out.mobility.kind = MobilityKind::kHybrid;
    } else {
      throw ParseError(name + ": unknown mobility kind '" + kind + "'");
    }
    out.mobility.drift_sigma = sec.number("drift_sigma", 0.0);
    out.mobility.trajectory = parse_waypoints(sec, "trajectory");
    out.mobility.transition = parse_matrix(sec, "transition");
    sec.finish();
  }
  for (int i = 0;; ++i) {
    const std::string key = "mobility.state." + std::to_string(i);
    if (!sections.count(key)) break;
    Section sec = pick(sections, name, key);
    out.mobility.states.push_back(channel_params_from(sec, sc.channel_params));
    sec.finish();
  }

  if (!sections.empty()) {
    throw ParseError(name + ": unknown section [" + sections.begin()->first + "]");
  }

  try {
    sc.validate();
    out.mobility.validate();
  } catch (const InvalidScenario& e) {
    throw ValidationError(std::string(e.what()) + " (in " + name + ")");
  }
  return out;
}

ParsedScenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

}  // namespace rissim
