#include "hsl/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "hsl/error.hpp"

namespace hsl {
namespace {

constexpr const char* kDefaultOutputDir = "hsl-out";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string where(std::size_t line) { return "line " + std::to_string(line) + ": "; }

struct Entry {
  std::string value;
  std::size_t line = 0;
};

// One [section] occurrence with its keys in file order.
struct Section {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, Entry> entries;
  std::vector<std::string> order;
};

class Reader {
 public:
  explicit Reader(Section& section) : section_(section) {}

  template <typename T>
  std::optional<T> unsigned_value(const std::string& key) {
    const auto* e = take(key);
    if (!e) return std::nullopt;
    T v{};
    const auto* first = e->value.data();
    const auto* last = first + e->value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      throw ConfigError(where(e->line) + "'" + key + "' must be a non-negative integer, got '" +
                        e->value + "'");
    }
    return v;
  }

  std::optional<double> real(const std::string& key) {
    const auto* e = take(key);
    if (!e) return std::nullopt;
    return parse_real(key, *e);
  }

  static double parse_real(const std::string& key, const Entry& e) {
    double v = 0.0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      throw ConfigError(where(e.line) + "'" + key + "' must be a finite number, got '" + e.value +
                        "'");
    }
    return v;
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto* e = take(key);
    if (!e) return std::nullopt;
    const auto v = lower(e->value);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(where(e->line) + "'" + key + "' must be true or false, got '" + e->value +
                      "'");
  }

  std::optional<std::string> text(const std::string& key) {
    const auto* e = take(key);
    if (!e) return std::nullopt;
    return e->value;
  }

  const Entry* entry(const std::string& key) const {
    auto it = section_.entries.find(key);
    return it == section_.entries.end() ? nullptr : &it->second;
  }

  std::size_t line_of(const std::string& key) const {
    auto it = section_.entries.find(key);
    return it == section_.entries.end() ? section_.line : it->second.line;
  }

  /// Every key must have been consumed.
  void finish() const {
    for (const auto& key : section_.order) {
      if (!used_.count(key)) {
        throw ConfigError(where(section_.entries.at(key).line) + "unknown key '" + key +
                          "' in [" + section_.name + "]");
      }
    }
  }

 private:
  const Entry* take(const std::string& key) {
    auto it = section_.entries.find(key);
    if (it == section_.entries.end()) return nullptr;
    used_[key] = true;
    return &it->second;
  }

  Section& section_;
  std::map<std::string, bool> used_;
};

std::vector<Section> split_sections(std::string_view text) {
  std::vector<Section> sections;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where(line_no) + "malformed section header");
      Section s;
      s.name = lower(trim(line.substr(1, line.size() - 2)));
      s.line = line_no;
      sections.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where(line_no) + "expected 'key = value', got '" + std::string(line) + "'");
    }
    if (sections.empty()) throw ConfigError(where(line_no) + "key outside of any section");
    const std::string key = lower(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(where(line_no) + "empty key");
    auto& s = sections.back();
    if (s.entries.count(key)) {
      throw ConfigError(where(line_no) + "duplicate key '" + key + "' in [" + s.name + "]");
    }
    s.entries[key] = {std::string(trim(line.substr(eq + 1))), line_no};
    s.order.push_back(key);
  }
  return sections;
}

TopologyConfig read_topology(Section& section) {
  Reader r(section);
  const auto kind_text = r.text("kind");
  if (!kind_text) {
    throw ConfigError(where(section.line) + "[topology] requires 'kind'");
  }
  TopologyConfig c;
  try {
    c.kind = parse_topology_kind(lower(*kind_text));
  } catch (const ConfigError& e) {
    throw ConfigError(where(r.line_of("kind")) + e.what());
  }
  auto need = [&](const std::string& key) {
    auto v = r.unsigned_value<std::size_t>(key);
    if (!v) {
      throw ConfigError(where(section.line) + "topology kind " + std::string(to_string(c.kind)) +
                        " requires '" + key + "'");
    }
    return *v;
  };
  c.n_s = need("n_s");
  switch (c.kind) {
    case TopologyKind::Hsl:
      c.n_h = need("n_h");
      c.b_hs = need("b_hs");
      c.b_hh = need("b_hh");
      c.b_sh = need("b_sh");
      break;
    case TopologyKind::ElLocal:
    case TopologyKind::ElOracle:
      c.k = need("k");
      break;
    case TopologyKind::ErdosRenyi: {
      auto p = r.real("p");
      if (!p) throw ConfigError(where(section.line) + "topology kind erdos_renyi requires 'p'");
      c.p = *p;
      break;
    }
    case TopologyKind::Torus:
    case TopologyKind::FedAvgStar:
      break;
  }
  r.finish();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(where(section.line) + "[topology] " + e.what());
  }
  return c;
}

void read_training(Section& section, TrainConfig& t) {
  Reader r(section);
  // Hyperparameters of the CNN and Transformer experiments; explicit keys win.
  if (auto v = r.text("preset")) {
    const auto name = lower(*v);
    if (name == "cifar10") {
      t.step = {false, 0.01};
      t.batch_size = 128;
      t.local_steps = 3;
    } else if (name == "ag_news") {
      t.step = {false, 0.05};
      t.batch_size = 64;
      t.local_steps = 5;
    } else {
      throw ConfigError(where(r.line_of("preset")) + "unknown preset '" + *v +
                        "' (expected cifar10 or ag_news)");
    }
  }
  if (auto v = r.unsigned_value<std::size_t>("rounds")) t.rounds = *v;
  if (auto v = r.unsigned_value<std::size_t>("local_steps")) t.local_steps = *v;
  if (auto v = r.unsigned_value<std::size_t>("batch_size")) t.batch_size = *v;
  if (auto v = r.unsigned_value<std::size_t>("eval_every")) t.eval_every = *v;
  if (auto v = r.real("x0")) t.x0 = *v;
  if (auto v = r.text("step_size")) {
    if (lower(*v) == "derived") {
      t.step = {true, 0.0};
    } else {
      t.step = {false, Reader::parse_real("step_size", *r.entry("step_size"))};
    }
  }
  if (auto v = r.real("l")) t.constants.L = *v;
  if (auto v = r.real("sigma_sq")) t.constants.sigma_sq = *v;
  if (auto v = r.real("h_sq")) t.constants.H_sq = *v;
  if (auto v = r.real("delta0")) t.constants.delta0 = *v;
  r.finish();
}

void read_objective(Section& section, ObjectiveConfig& o) {
  Reader r(section);
  if (auto v = r.text("kind")) {
    try {
      o.kind = parse_objective_kind(lower(*v));
    } catch (const ConfigError& e) {
      throw ConfigError(where(r.line_of("kind")) + e.what());
    }
  }
  if (o.kind == ObjectiveKind::Quadratic) {
    auto& q = o.quadratic;
    if (auto v = r.unsigned_value<std::size_t>("dim")) q.dim = *v;
    if (auto v = r.unsigned_value<std::size_t>("extra_rows")) q.extra_rows = *v;
    if (auto v = r.real("spread")) q.spread = *v;
    if (auto v = r.real("heterogeneity")) q.heterogeneity = *v;
    if (auto v = r.boolean("shared_matrix")) q.shared_matrix = *v;
  } else {
    auto& l = o.logistic;
    if (auto v = r.unsigned_value<std::size_t>("features")) l.features = *v;
    if (auto v = r.unsigned_value<std::size_t>("train_samples")) l.train_samples = *v;
    if (auto v = r.unsigned_value<std::size_t>("test_samples")) l.test_samples = *v;
    if (auto v = r.real("alpha")) l.alpha = *v;
    if (auto v = r.real("separation")) l.separation = *v;
    if (auto v = r.real("label_noise")) l.label_noise = *v;
  }
  r.finish();
}

std::string number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void validate_objective(const ObjectiveConfig& o) {
  if (o.kind == ObjectiveKind::Quadratic) {
    const auto& q = o.quadratic;
    if (q.dim < 1) throw ConfigError("[objective] dim must be >= 1");
    if (q.spread < 0.0) throw ConfigError("[objective] spread must be >= 0");
    if (q.heterogeneity < 0.0) throw ConfigError("[objective] heterogeneity must be >= 0");
  } else {
    const auto& l = o.logistic;
    if (l.features < 1) throw ConfigError("[objective] features must be >= 1");
    if (l.train_samples < l.nodes) {
      throw ConfigError("[objective] train_samples must be >= the number of nodes");
    }
    if (l.test_samples < 1) throw ConfigError("[objective] test_samples must be >= 1");
    if (!(l.alpha > 0.0)) throw ConfigError("[objective] alpha must be > 0");
    if (l.separation < 0.0) throw ConfigError("[objective] separation must be >= 0");
    if (!(l.label_noise >= 0.0 && l.label_noise < 0.5)) {
      throw ConfigError("[objective] label_noise must satisfy 0 <= label_noise < 0.5");
    }
  }
}

}  // namespace

std::string_view to_string(Command command) noexcept {
  switch (command) {
    case Command::Run: return "run";
    case Command::Spectral: return "spectral";
    case Command::Bounds: return "bounds";
    case Command::Verify: return "verify";
  }
  return "unknown";
}

Command parse_command(std::string_view name) {
  const auto n = lower(name);
  for (auto c : {Command::Run, Command::Spectral, Command::Bounds, Command::Verify}) {
    if (to_string(c) == n) return c;
  }
  throw ConfigError("unknown command '" + std::string(name) +
                    "' (expected run, spectral, bounds or verify)");
}

bool ObjectiveConfig::operator==(const ObjectiveConfig& o) const {
  const auto& a = quadratic;
  const auto& b = o.quadratic;
  const auto& c = logistic;
  const auto& d = o.logistic;
  return kind == o.kind && a.nodes == b.nodes && a.dim == b.dim && a.extra_rows == b.extra_rows &&
         a.spread == b.spread && a.heterogeneity == b.heterogeneity &&
         a.shared_matrix == b.shared_matrix && c.nodes == d.nodes && c.features == d.features &&
         c.train_samples == d.train_samples && c.test_samples == d.test_samples &&
         c.alpha == d.alpha && c.separation == d.separation && c.label_noise == d.label_noise;
}

bool ExperimentSpec::operator==(const ExperimentSpec& o) const {
  return name == o.name && command == o.command && seed == o.seed && topologies == o.topologies &&
         training == o.training && objective == o.objective &&
         spectral_samples == o.spectral_samples && verify_trials == o.verify_trials &&
         verify_dim == o.verify_dim && output_dir == o.output_dir;
}

void ExperimentSpec::validate() const {
  if (name.empty()) throw ConfigError("[experiment] name must be nonempty");
  if (output_dir.empty()) throw ConfigError("[output] dir must be nonempty");
  for (const auto& t : topologies) t.validate();
  switch (command) {
    case Command::Run:
      if (topologies.size() != 1) {
        throw ConfigError("run requires exactly one [topology] section, got " +
                          std::to_string(topologies.size()));
      }
      if (!(training.topology == topologies.front())) {
        throw ConfigError("training topology does not match [topology]");
      }
      if (training.seed != seed) throw ConfigError("training seed does not match the experiment seed");
      training.validate();
      validate_objective(objective);
      break;
    case Command::Spectral:
      if (topologies.empty()) throw ConfigError("spectral requires at least one [topology] section");
      if (spectral_samples < 2) throw ConfigError("[spectral] samples must be >= 2");
      break;
    case Command::Bounds:
      if (topologies.empty()) throw ConfigError("bounds requires at least one [topology] section");
      break;
    case Command::Verify:
      if (verify_trials < 2) throw ConfigError("[verify] trials must be >= 2");
      if (verify_dim < 1) throw ConfigError("[verify] dim must be >= 1");
      break;
  }
}

ExperimentSpec parse_config(std::string_view text) {
  auto sections = split_sections(text);
  ExperimentSpec spec;
  spec.output_dir = kDefaultOutputDir;
  bool have_experiment = false;
  bool have_training = false;
  bool have_objective = false;
  std::optional<std::uint64_t> seed;
  std::map<std::string, std::size_t> seen;

  for (auto& s : sections) {
    if (s.name != "topology" && seen[s.name]++ > 0) {
      throw ConfigError(where(s.line) + "duplicate section [" + s.name + "]");
    }
    if (s.name == "experiment") {
      have_experiment = true;
      Reader r(s);
      if (auto v = r.text("name")) spec.name = *v;
      if (auto v = r.text("command")) {
        try {
          spec.command = parse_command(*v);
        } catch (const ConfigError& e) {
          throw ConfigError(where(r.line_of("command")) + e.what());
        }
      } else {
        throw ConfigError(where(s.line) + "[experiment] requires 'command'");
      }
      seed = r.unsigned_value<std::uint64_t>("seed");
      r.finish();
    } else if (s.name == "topology") {
      spec.topologies.push_back(read_topology(s));
    } else if (s.name == "training") {
      have_training = true;
      read_training(s, spec.training);
    } else if (s.name == "objective") {
      have_objective = true;
      read_objective(s, spec.objective);
    } else if (s.name == "spectral") {
      Reader r(s);
      if (auto v = r.unsigned_value<std::size_t>("samples")) spec.spectral_samples = *v;
      r.finish();
    } else if (s.name == "verify") {
      Reader r(s);
      if (auto v = r.unsigned_value<std::size_t>("trials")) spec.verify_trials = *v;
      if (auto v = r.unsigned_value<std::size_t>("dim")) spec.verify_dim = *v;
      r.finish();
    } else if (s.name == "output") {
      Reader r(s);
      if (auto v = r.text("dir")) spec.output_dir = *v;
      r.finish();
    } else {
      throw ConfigError(where(s.line) + "unknown section [" + s.name + "]");
    }
  }

  if (!have_experiment) throw ConfigError("missing [experiment] section");
  if (!seed) {
    throw ConfigError("missing required key 'seed' in [experiment]; runs must be explicitly seeded");
  }
  spec.seed = *seed;
  if (spec.command == Command::Run) {
    if (!have_training) throw ConfigError("run requires a [training] section");
    if (!have_objective) throw ConfigError("run requires an [objective] section");
  }
  spec.training.seed = spec.seed;
  if (!spec.topologies.empty()) {
    spec.training.topology = spec.topologies.front();
    spec.objective.quadratic.nodes = spec.topologies.front().n_s;
    spec.objective.logistic.nodes = spec.topologies.front().n_s;
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config file '" + path.string() + "'");
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "[experiment]\n"
      << "name = " << spec.name << "\n"
      << "command = " << to_string(spec.command) << "\n"
      << "seed = " << spec.seed << "\n";

  for (const auto& t : spec.topologies) {
    out << "\n[topology]\nkind = " << to_string(t.kind) << "\nn_s = " << t.n_s << "\n";
    switch (t.kind) {
      case TopologyKind::Hsl:
        out << "n_h = " << t.n_h << "\nb_hs = " << t.b_hs << "\nb_hh = " << t.b_hh
            << "\nb_sh = " << t.b_sh << "\n";
        break;
      case TopologyKind::ElLocal:
      case TopologyKind::ElOracle:
        out << "k = " << t.k << "\n";
        break;
      case TopologyKind::ErdosRenyi:
        out << "p = " << number(t.p) << "\n";
        break;
      case TopologyKind::Torus:
      case TopologyKind::FedAvgStar:
        break;
    }
  }

  const auto& tr = spec.training;
  out << "\n[training]\n"
      << "rounds = " << tr.rounds << "\n"
      << "local_steps = " << tr.local_steps << "\n"
      << "batch_size = " << tr.batch_size << "\n"
      << "step_size = " << (tr.step.derived ? std::string("derived") : number(tr.step.value))
      << "\n"
      << "eval_every = " << tr.eval_every << "\n"
      << "x0 = " << number(tr.x0) << "\n";
  if (tr.constants.L) out << "L = " << number(*tr.constants.L) << "\n";
  if (tr.constants.sigma_sq) out << "sigma_sq = " << number(*tr.constants.sigma_sq) << "\n";
  if (tr.constants.H_sq) out << "H_sq = " << number(*tr.constants.H_sq) << "\n";
  if (tr.constants.delta0) out << "delta0 = " << number(*tr.constants.delta0) << "\n";

  const auto& o = spec.objective;
  out << "\n[objective]\nkind = " << to_string(o.kind) << "\n";
  if (o.kind == ObjectiveKind::Quadratic) {
    out << "dim = " << o.quadratic.dim << "\n"
        << "extra_rows = " << o.quadratic.extra_rows << "\n"
        << "spread = " << number(o.quadratic.spread) << "\n"
        << "heterogeneity = " << number(o.quadratic.heterogeneity) << "\n"
        << "shared_matrix = " << (o.quadratic.shared_matrix ? "true" : "false") << "\n";
  } else {
    out << "features = " << o.logistic.features << "\n"
        << "train_samples = " << o.logistic.train_samples << "\n"
        << "test_samples = " << o.logistic.test_samples << "\n"
        << "alpha = " << number(o.logistic.alpha) << "\n"
        << "separation = " << number(o.logistic.separation) << "\n"
        << "label_noise = " << number(o.logistic.label_noise) << "\n";
  }

  out << "\n[spectral]\nsamples = " << spec.spectral_samples << "\n"
      << "\n[verify]\ntrials = " << spec.verify_trials << "\ndim = " << spec.verify_dim << "\n"
      << "\n[output]\ndir = " << spec.output_dir.string() << "\n";
  return out.str();
}

}  // namespace hsl
