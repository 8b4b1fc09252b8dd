#include "dgks/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace dgks {

using nlohmann::json;

namespace {

constexpr const char* kAxis[3] = {"x", "y", "z"};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

// Typed access to one JSON object with its dotted field path.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const { return j_.at(key); }
  Section child(const std::string& key) const { return Section(j_.at(key), field(key)); }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!ok.count(it.key())) fail(field(it.key()), "unknown field");
    }
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return as_number(j_.at(key), field(key));
  }
  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    return as_integer(j_.at(key), field(key));
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) fail(field(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_boolean()) fail(field(key), "expected true or false");
    return j_.at(key).get<bool>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_string()) fail(field(key), "expected a string");
    return j_.at(key).get<std::string>();
  }
  Vec3 vec3(const std::string& key, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    return as_vec3(j_.at(key), field(key));
  }
  Index3 index3(const std::string& key, const Index3& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (v.is_number_integer()) {
      const int n = static_cast<int>(as_integer(v, field(key)));
      return {n, n, n};
    }
    if (!v.is_array() || v.size() != 3) fail(field(key), "expected an integer or a list of 3 integers");
    Index3 r;
    for (int a = 0; a < 3; ++a) r[a] = static_cast<int>(as_integer(v[a], field(key) + "[" + std::to_string(a) + "]"));
    return r;
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }
  static long as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long>();
  }
  static Vec3 as_vec3(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3) fail(path, "expected a list of 3 numbers");
    return Vec3(as_number(v[0], path + "[0]"), as_number(v[1], path + "[1]"), as_number(v[2], path + "[2]"));
  }

 private:
  const json& j_;
  std::string path_;
};

json to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }
json to_json(const Index3& v) { return json::array({v[0], v[1], v[2]}); }

ProjectorSpec read_projector(const Section& s) {
  s.allow({"shape", "axis", "sign", "coupling", "width", "cutoff"});
  ProjectorSpec p;
  const std::string shape = s.text("shape", "s");
  if (shape == "s") {
    p.shape = ProjectorSpec::Shape::S;
  } else if (shape == "p") {
    p.shape = ProjectorSpec::Shape::P;
  } else {
    fail(s.field("shape"), "expected \"s\" or \"p\"");
  }
  p.axis = static_cast<int>(s.integer("axis", p.axis));
  p.sign = static_cast<int>(s.integer("sign", p.sign));
  p.coupling = s.number("coupling", p.coupling);
  p.width = s.number("width", p.width);
  p.cutoff = s.number("cutoff", p.cutoff);
  return p;
}

AtomEntry read_atom(const Section& s) {
  s.allow({"species", "position"});
  if (!s.has("species")) fail(s.field("species"), "missing");
  if (!s.has("position")) fail(s.field("position"), "missing");
  return {s.text("species", ""), s.vec3("position", Vec3::Zero())};
}

std::vector<AtomEntry> read_atoms(const json& list, const std::string& path) {
  if (!list.is_array()) fail(path, "expected a list");
  std::vector<AtomEntry> out;
  for (std::size_t i = 0; i < list.size(); ++i) out.push_back(read_atom(Section(list[i], path + "[" + std::to_string(i) + "]")));
  return out;
}

std::string scheme_name(MixingScheme s) { return s == MixingScheme::Anderson ? "anderson" : "linear"; }

std::string where(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Vec3 RunConfig::domain_extents() const {
  if (extents) return *extents;
  if (lattice) {
    Vec3 e;
    for (int a = 0; a < 3; ++a) e[a] = lattice->cell[a] * lattice->repetitions[a];
    return e;
  }
  throw ConfigError("domain.extents: required when no lattice is given");
}

Index3 RunConfig::grid_size() const {
  if (grid_points) return *grid_points;
  const Vec3 e = domain_extents();
  Index3 n;
  for (int a = 0; a < 3; ++a) n[a] = std::max(2, static_cast<int>(std::lround(e[a] / grid_spacing)));
  return n;
}

Vec3 RunConfig::buffer() const {
  if (!dg.buffer_cells) return dg.buffer;
  if (!lattice) throw ConfigError("dg.buffer_cells: requires a lattice");
  return dg.buffer_cells->cwiseProduct(lattice->cell);
}

std::vector<Vec3> generate_supercell(const Vec3& cell, const std::vector<Vec3>& fractional_basis,
                                     const Index3& repetitions, double amplitude, std::uint64_t seed) {
  if (amplitude < 0.0) throw ConfigError("lattice.displacement: must be >= 0");
  Vec3 extent;
  for (int a = 0; a < 3; ++a) extent[a] = cell[a] * repetitions[a];
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(-amplitude, amplitude);
  std::vector<Vec3> out;
  for (int k = 0; k < repetitions[2]; ++k)
    for (int j = 0; j < repetitions[1]; ++j)
      for (int i = 0; i < repetitions[0]; ++i)
        for (const Vec3& f : fractional_basis) {
          Vec3 x = (f + Vec3(i, j, k)).cwiseProduct(cell);
          if (amplitude > 0.0) {
            for (int a = 0; a < 3; ++a) x[a] += shift(rng);
          }
          for (int a = 0; a < 3; ++a) x[a] = wrap(x[a], extent[a]);
          out.push_back(x);
        }
  return out;
}

std::vector<AtomSpec> resolve_atoms(const RunConfig& config) {
  auto species = [&](const std::string& name, const std::string& path) -> const SpeciesConfig& {
    for (const auto& s : config.species)
      if (s.name == name) return s;
    fail(path, "unknown species \"" + name + "\"");
  };
  auto make = [](const SpeciesConfig& s, const Vec3& x) {
    AtomSpec a;
    a.position = x;
    a.depth = s.depth;
    a.width = s.width;
    a.valence = s.valence;
    a.projectors = s.projectors;
    return a;
  };
  std::vector<AtomSpec> out;
  for (std::size_t i = 0; i < config.atoms.size(); ++i) {
    out.push_back(make(species(config.atoms[i].species, "atoms[" + std::to_string(i) + "].species"),
                       config.atoms[i].position));
  }
  if (config.lattice) {
    const LatticeConfig& l = *config.lattice;
    std::vector<Vec3> frac;
    for (const auto& b : l.basis) frac.push_back(b.position);
    const std::vector<Vec3> pos = generate_supercell(l.cell, frac, l.repetitions, l.displacement, l.seed);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      const std::size_t b = i % l.basis.size();
      out.push_back(make(species(l.basis[b].species, "lattice.basis[" + std::to_string(b) + "].species"), pos[i]));
    }
  }
  return out;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  const Section root(j, "");
  root.allow({"domain", "partition", "species", "atoms", "lattice", "grid", "hamiltonian", "dg", "scf", "mode",
              "output", "workers", "seed"});
  if (root.has("domain")) {
    const Section s = root.child("domain");
    s.allow({"extents"});
    if (s.has("extents")) c.extents = s.vec3("extents", Vec3::Zero());
  }
  c.partition = root.index3("partition", c.partition);
  if (root.has("species")) {
    const json& sp = root.raw("species");
    if (!sp.is_object()) fail("species", "expected an object keyed by species name");
    for (auto it = sp.begin(); it != sp.end(); ++it) {
      const Section s(it.value(), "species." + it.key());
      s.allow({"depth", "width", "valence", "projectors"});
      SpeciesConfig sc;
      sc.name = it.key();
      sc.depth = s.number("depth", sc.depth);
      sc.width = s.number("width", sc.width);
      sc.valence = s.number("valence", sc.valence);
      if (s.has("projectors")) {
        const json& list = s.raw("projectors");
        if (!list.is_array()) fail(s.field("projectors"), "expected a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
          sc.projectors.push_back(read_projector(Section(list[i], s.field("projectors") + "[" + std::to_string(i) + "]")));
        }
      }
      c.species.push_back(std::move(sc));
    }
  }
  if (root.has("atoms")) c.atoms = read_atoms(root.raw("atoms"), "atoms");
  if (root.has("lattice")) {
    const Section s = root.child("lattice");
    s.allow({"cell", "basis", "repetitions", "displacement", "seed"});
    LatticeConfig l;
    l.cell = s.vec3("cell", l.cell);
    if (!s.has("basis")) fail(s.field("basis"), "missing");
    l.basis = read_atoms(s.raw("basis"), s.field("basis"));
    l.repetitions = s.index3("repetitions", l.repetitions);
    l.displacement = s.number("displacement", l.displacement);
    l.seed = s.unsigned_integer("seed", l.seed);
    c.lattice = std::move(l);
  }
  if (root.has("grid")) {
    const Section s = root.child("grid");
    s.allow({"points", "spacing"});
    if (s.has("points")) c.grid_points = s.index3("points", {0, 0, 0});
    c.grid_spacing = s.number("spacing", c.grid_spacing);
  }
  if (root.has("hamiltonian")) {
    const Section s = root.child("hamiltonian");
    s.allow({"hartree", "xc"});
    c.hamiltonian.hartree = s.boolean("hartree", c.hamiltonian.hartree);
    c.hamiltonian.xc = s.boolean("xc", c.hamiltonian.xc);
  }
  if (root.has("dg")) {
    const Section s = root.child("dg");
    s.allow({"alpha", "buffer", "buffer_cells", "lgl_order", "basis_per_atom", "basis_per_element", "svd_threshold",
             "inner_iterations", "max_dimension"});
    DGConfig& d = c.dg;
    d.alpha = s.number("alpha", d.alpha);
    d.buffer = s.vec3("buffer", d.buffer);
    if (s.has("buffer_cells")) d.buffer_cells = s.vec3("buffer_cells", Vec3::Zero());
    d.lgl_order = s.index3("lgl_order", d.lgl_order);
    d.basis_per_atom = static_cast<int>(s.integer("basis_per_atom", d.basis_per_atom));
    if (s.has("basis_per_element")) {
      const json& list = s.raw("basis_per_element");
      if (!list.is_array()) fail(s.field("basis_per_element"), "expected a list of integers");
      for (std::size_t i = 0; i < list.size(); ++i) {
        d.basis_per_element.push_back(static_cast<int>(
            Section::as_integer(list[i], s.field("basis_per_element") + "[" + std::to_string(i) + "]")));
      }
    }
    d.svd_threshold = s.number("svd_threshold", d.svd_threshold);
    d.inner_iterations = static_cast<int>(s.integer("inner_iterations", d.inner_iterations));
    d.max_dimension = s.integer("max_dimension", d.max_dimension);
  }
  if (root.has("scf")) {
    const Section s = root.child("scf");
    s.allow({"tolerance", "max_iterations", "temperature", "mixing", "inner_iterations", "extra_states"});
    SCFConfig& o = c.scf;
    o.tolerance = s.number("tolerance", o.tolerance);
    o.max_iterations = static_cast<int>(s.integer("max_iterations", o.max_iterations));
    o.temperature = s.number("temperature", o.temperature);
    o.inner_iterations = static_cast<int>(s.integer("inner_iterations", o.inner_iterations));
    o.extra_states = static_cast<int>(s.integer("extra_states", o.extra_states));
    if (s.has("mixing")) {
      const Section m = s.child("mixing");
      m.allow({"scheme", "depth", "alpha"});
      const std::string scheme = m.text("scheme", scheme_name(o.mixing.scheme));
      if (scheme == "anderson") {
        o.mixing.scheme = MixingScheme::Anderson;
      } else if (scheme == "linear") {
        o.mixing.scheme = MixingScheme::Linear;
      } else {
        fail(m.field("scheme"), "expected \"anderson\" or \"linear\"");
      }
      o.mixing.depth = static_cast<int>(m.integer("depth", o.mixing.depth));
      o.mixing.alpha = m.number("alpha", o.mixing.alpha);
    }
  }
  c.mode = root.text("mode", c.mode);
  if (root.has("output")) {
    const Section s = root.child("output");
    s.allow({"directory", "dump_stiffness"});
    c.output = s.text("directory", c.output);
    c.dump_stiffness = s.boolean("dump_stiffness", c.dump_stiffness);
  }
  c.workers = static_cast<int>(root.integer("workers", c.workers));
  c.seed = root.unsigned_integer("seed", c.seed);
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  if (c.extents) j["domain"]["extents"] = to_json(*c.extents);
  j["partition"] = to_json(c.partition);
  j["species"] = json::object();
  for (const auto& s : c.species) {
    json js{{"depth", s.depth}, {"width", s.width}, {"valence", s.valence}, {"projectors", json::array()}};
    for (const auto& p : s.projectors) {
      js["projectors"].push_back({{"shape", p.shape == ProjectorSpec::Shape::S ? "s" : "p"},
                                  {"axis", p.axis},
                                  {"sign", p.sign},
                                  {"coupling", p.coupling},
                                  {"width", p.width},
                                  {"cutoff", p.cutoff}});
    }
    j["species"][s.name] = js;
  }
  auto atoms = [](const std::vector<AtomEntry>& list) {
    json a = json::array();
    for (const auto& e : list) a.push_back({{"species", e.species}, {"position", to_json(e.position)}});
    return a;
  };
  if (!c.atoms.empty()) j["atoms"] = atoms(c.atoms);
  if (c.lattice) {
    j["lattice"] = {{"cell", to_json(c.lattice->cell)},
                    {"basis", atoms(c.lattice->basis)},
                    {"repetitions", to_json(c.lattice->repetitions)},
                    {"displacement", c.lattice->displacement},
                    {"seed", c.lattice->seed}};
  }
  j["grid"]["spacing"] = c.grid_spacing;
  if (c.grid_points) j["grid"]["points"] = to_json(*c.grid_points);
  j["hamiltonian"] = {{"hartree", c.hamiltonian.hartree}, {"xc", c.hamiltonian.xc}};
  j["dg"] = {{"alpha", c.dg.alpha},
             {"buffer", to_json(c.dg.buffer)},
             {"lgl_order", to_json(c.dg.lgl_order)},
             {"basis_per_atom", c.dg.basis_per_atom},
             {"svd_threshold", c.dg.svd_threshold},
             {"inner_iterations", c.dg.inner_iterations},
             {"max_dimension", c.dg.max_dimension}};
  if (c.dg.buffer_cells) j["dg"]["buffer_cells"] = to_json(*c.dg.buffer_cells);
  if (!c.dg.basis_per_element.empty()) j["dg"]["basis_per_element"] = c.dg.basis_per_element;
  j["scf"] = {{"tolerance", c.scf.tolerance},
              {"max_iterations", c.scf.max_iterations},
              {"temperature", c.scf.temperature},
              {"inner_iterations", c.scf.inner_iterations},
              {"extra_states", c.scf.extra_states},
              {"mixing",
               {{"scheme", scheme_name(c.scf.mixing.scheme)}, {"depth", c.scf.mixing.depth}, {"alpha", c.scf.mixing.alpha}}}};
  j["mode"] = c.mode;
  j["output"] = {{"directory", c.output}, {"dump_stiffness", c.dump_stiffness}};
  j["workers"] = c.workers;
  j["seed"] = c.seed;
  return j;
}

void validate(const RunConfig& c) {
  if (c.mode != "global" && c.mode != "dg" && c.mode != "compare") {
    fail("mode", "expected \"global\", \"dg\" or \"compare\"");
  }
  if (c.workers < 1) fail("workers", "must be >= 1");
  if (c.species.empty()) fail("species", "at least one species is required");
  for (const auto& s : c.species) {
    const std::string base = "species." + s.name;
    if (!(s.width > 0.0)) fail(base + ".width", "must be positive");
    if (!(s.valence > 0.0)) fail(base + ".valence", "must be positive");
    for (std::size_t i = 0; i < s.projectors.size(); ++i) {
      const ProjectorSpec& p = s.projectors[i];
      const std::string pp = base + ".projectors[" + std::to_string(i) + "]";
      if (p.sign != 1 && p.sign != -1) fail(pp + ".sign", "must be +1 or -1");
      if (!(p.coupling >= 0.0)) fail(pp + ".coupling", "must be >= 0");
      if (!(p.width > 0.0)) fail(pp + ".width", "must be positive");
      if (!(p.cutoff > 0.0)) fail(pp + ".cutoff", "must be positive");
      if (p.axis < 0 || p.axis > 2) fail(pp + ".axis", "must be 0, 1 or 2");
    }
  }
  if (c.lattice) {
    if (c.lattice->basis.empty()) fail("lattice.basis", "must not be empty");
    if (c.lattice->displacement < 0.0) fail("lattice.displacement", "must be >= 0");
    for (int a = 0; a < 3; ++a) {
      if (c.lattice->repetitions[a] < 1) fail("lattice.repetitions", "must be >= 1");
      if (!(c.lattice->cell[a] > 0.0)) fail("lattice.cell", "must be positive");
    }
  }
  if (c.atoms.empty() && !c.lattice) fail("atoms", "either atoms or lattice is required");
  const Vec3 ext = c.domain_extents();
  for (int a = 0; a < 3; ++a) {
    if (!(ext[a] > 0.0)) fail("domain.extents", std::string("must be positive along ") + kAxis[a]);
    if (c.partition[a] < 1) fail("partition", std::string("must be >= 1 along ") + kAxis[a]);
  }
  if (!c.grid_points && !(c.grid_spacing > 0.0)) fail("grid.spacing", "must be positive");
  const Index3 n = c.grid_size();
  for (int a = 0; a < 3; ++a) {
    if (n[a] < 2) fail("grid.points", std::string("must be >= 2 along ") + kAxis[a]);
    if (n[a] % c.partition[a] != 0) {
      fail("partition", std::string("grid points along ") + kAxis[a] + " (" + std::to_string(n[a]) +
                            ") are not divisible by the element count");
    }
    if (c.dg.lgl_order[a] < 2) fail("dg.lgl_order", std::string("must be >= 2 along ") + kAxis[a]);
  }
  for (const auto& s : c.species)
    for (std::size_t i = 0; i < s.projectors.size(); ++i) {
      if (s.projectors[i].cutoff > 0.5 * ext.minCoeff()) {
        fail("species." + s.name + ".projectors[" + std::to_string(i) + "].cutoff",
             "exceeds half the smallest domain extent");
      }
    }
  const std::vector<AtomSpec> atoms = resolve_atoms(c);

  if (!(c.dg.alpha > 0.0)) fail("dg.alpha", "must be positive");
  if (c.dg.svd_threshold < 0.0) fail("dg.svd_threshold", "must be >= 0");
  if (c.dg.inner_iterations < 1) fail("dg.inner_iterations", "must be >= 1");
  if (c.dg.basis_per_atom < 1) fail("dg.basis_per_atom", "must be >= 1");
  if (c.dg.max_dimension < 1) fail("dg.max_dimension", "must be >= 1");
  const int elements = c.partition[0] * c.partition[1] * c.partition[2];
  if (!c.dg.basis_per_element.empty()) {
    if (static_cast<int>(c.dg.basis_per_element.size()) != elements) {
      fail("dg.basis_per_element", "expected " + std::to_string(elements) + " entries");
    }
    for (int v : c.dg.basis_per_element)
      if (v < 1) fail("dg.basis_per_element", "entries must be >= 1");
  }
  Vec3 buffer;
  try {
    buffer = c.buffer();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what());
  }
  const std::string bname = c.dg.buffer_cells ? "dg.buffer_cells" : "dg.buffer";
  for (int a = 0; a < 3; ++a) {
    const double l = ext[a] / c.partition[a];
    const double cap = 0.5 * (ext[a] - l);
    if (buffer[a] < 0.0 || buffer[a] > cap + 1e-9 * ext[a]) {
      std::ostringstream m;
      m << "buffer along " << kAxis[a] << " is " << buffer[a] << ", admissible range is [0, " << cap << "]";
      fail(bname, m.str());
    }
    const double h = ext[a] / n[a];
    if (std::abs(buffer[a] / h - std::round(buffer[a] / h)) > 1e-8) {
      fail(bname, std::string("buffer along ") + kAxis[a] + " is not a multiple of the grid spacing " +
                      std::to_string(h));
    }
  }

  if (!(c.scf.tolerance > 0.0)) fail("scf.tolerance", "must be positive");
  if (c.scf.max_iterations < 1) fail("scf.max_iterations", "must be >= 1");
  if (c.scf.temperature < 0.0) fail("scf.temperature", "must be >= 0");
  if (c.scf.inner_iterations < 1) fail("scf.inner_iterations", "must be >= 1");
  if (c.scf.extra_states < 0) fail("scf.extra_states", "must be >= 0");
  if (c.scf.mixing.depth < 0) fail("scf.mixing.depth", "must be >= 0");
  if (!(c.scf.mixing.alpha >= 0.0 && c.scf.mixing.alpha < 1.0)) fail("scf.mixing.alpha", "must lie in [0, 1)");
  const double electrons = total_valence(atoms);
  const int states = static_cast<int>(std::ceil(electrons - 1e-9)) + c.scf.extra_states;
  if (states > product(n)) fail("scf.extra_states", "more states than grid points");
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    const auto pos = msg.find("parse error");
    throw ConfigError("parse error at " + where(text, e.byte == 0 ? 0 : e.byte - 1) + ": " +
                      (pos == std::string::npos ? msg : msg.substr(pos)));
  }
  if (j.is_object() && j.contains("config") && j.contains("report")) j = j.at("config");
  RunConfig c = config_from_json(j);
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace dgks
