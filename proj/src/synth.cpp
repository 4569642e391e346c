#include "causal_al/synth.hpp"

#include "causal_al/error.hpp"
#include "causal_al/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace causal_al {

void SemSpec::add_node(std::string name, NodeNoise n) {
  nodes.push_back(std::move(name));
  noise.push_back(n);
}

void SemSpec::add_edge(std::string child, std::string parent, double weight) {
  edges.push_back({std::move(child), std::move(parent), weight});
}

std::size_t SemSpec::index_of(std::string_view name) const {
  const auto it = std::find(nodes.begin(), nodes.end(), name);
  if (it == nodes.end()) throw Error(ErrorKind::unknown_node, std::string(name));
  return static_cast<std::size_t>(it - nodes.begin());
}

void SemSpec::validate() const {
  if (noise.size() != nodes.size()) throw Error(ErrorKind::invalid_argument, "one noise entry per node");
  if (std::set<std::string>(nodes.begin(), nodes.end()).size() != nodes.size()) {
    throw Error(ErrorKind::invalid_argument, "duplicate node names");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (noise[i].family != NoiseFamily::none && !(noise[i].scale > 0.0)) {
      throw Error(ErrorKind::invalid_argument, "noise scale of " + nodes[i] + " must be positive");
    }
  }
  for (const auto& t : targets) index_of(t);
  topological_order(weight_matrix());
}

Eigen::MatrixXd SemSpec::weight_matrix() const {
  const auto d = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  for (const auto& e : edges) {
    if (e.child == e.parent) throw Error(ErrorKind::not_acyclic, "self loop on " + e.child);
    w(static_cast<Eigen::Index>(index_of(e.child)), static_cast<Eigen::Index>(index_of(e.parent))) += e.weight;
  }
  return w;
}

WeightedDag SemSpec::true_dag(std::optional<std::string> target) const {
  validate();
  return WeightedDag(nodes, weight_matrix(), std::move(target), {}, WeightScale::original);
}

// ---------------------------------------------------------------------------

namespace {

NoiseFamily parse_family(const std::string& s) {
  if (s == "uniform") return NoiseFamily::uniform;
  if (s == "laplace") return NoiseFamily::laplace;
  if (s == "gaussian") return NoiseFamily::gaussian;
  if (s == "none") return NoiseFamily::none;
  throw Error(ErrorKind::bad_format, "unknown noise family '" + s + "'");
}

std::string_view family_name(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::uniform: return "uniform";
    case NoiseFamily::laplace: return "laplace";
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::none: return "none";
  }
  return "uniform";
}

double draw_noise(Rng& rng, const NodeNoise& n) {
  switch (n.family) {
    case NoiseFamily::uniform: return rng.uniform(-n.scale, n.scale);
    case NoiseFamily::laplace: return rng.laplace(n.scale);
    case NoiseFamily::gaussian: return n.scale * rng.normal();
    case NoiseFamily::none: return 0.0;
  }
  return 0.0;
}

}  // namespace

SemSpec parse_sem_spec(std::string_view text) {
  SemSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    auto fail = [&](const std::string& why) {
      return Error(ErrorKind::bad_format, "sem spec line " + std::to_string(line_no) + ": " + why);
    };
    try {
      if (tok[0] == "node" && (tok.size() == 4 || tok.size() == 5)) {
        NodeNoise n{parse_family(tok[2]), std::stod(tok[3]), tok.size() == 5 ? std::stod(tok[4]) : 0.0};
        spec.add_node(tok[1], n);
      } else if (tok[0] == "edge" && tok.size() == 4) {
        spec.add_edge(tok[1], tok[2], std::stod(tok[3]));
      } else if (tok[0] == "target" && tok.size() == 2) {
        spec.targets.push_back(tok[1]);
      } else if (tok[0] == "seed" && tok.size() == 2) {
        spec.seed = std::stoull(tok[1]);
      } else {
        throw fail("unrecognized record");
      }
    } catch (const std::invalid_argument&) {
      throw fail("not a number");
    } catch (const std::out_of_range&) {
      throw fail("number out of range");
    }
  }
  spec.validate();
  return spec;
}

SemSpec load_sem_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::missing_file, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_sem_spec(buffer.str());
}

std::string format_sem_spec(const SemSpec& spec) {
  std::string out = "seed " + std::to_string(spec.seed) + "\n";
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    out += "node " + spec.nodes[i] + " " + std::string(family_name(spec.noise[i].family)) + " " +
           format_double(spec.noise[i].scale);
    if (spec.noise[i].offset != 0.0) out += " " + format_double(spec.noise[i].offset);
    out += "\n";
  }
  for (const auto& e : spec.edges) out += "edge " + e.child + " " + e.parent + " " + format_double(e.weight) + "\n";
  for (const auto& t : spec.targets) out += "target " + t + "\n";
  return out;
}

FeatureTable sample_sem(const SemSpec& spec, std::size_t n_rows, std::string_view id_prefix) {
  spec.validate();
  const Eigen::MatrixXd w = spec.weight_matrix();
  const auto order = topological_order(w);
  const auto d = static_cast<Eigen::Index>(spec.nodes.size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n_rows), d);
  std::vector<std::string> ids;
  ids.reserve(n_rows);
  Rng rng(spec.seed);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    for (auto node : order) {
      const auto i = static_cast<Eigen::Index>(node);
      double v = spec.noise[node].offset + draw_noise(rng, spec.noise[node]);
      for (Eigen::Index j = 0; j < d; ++j) {
        if (w(i, j) != 0.0) v += w(i, j) * x(row, j);
      }
      x(row, i) = v;
    }
    ids.push_back(std::string(id_prefix) + std::to_string(r));
  }
  return FeatureTable(std::move(ids), spec.nodes, std::move(x), spec.targets);
}

HeterogeneousWorld make_heterogeneous_world(const SemSpec& shared, const WorldOptions& options) {
  shared.validate();
  if (options.n_subsets == 0 || options.matching_subset >= options.n_subsets) {
    throw Error(ErrorKind::invalid_argument, "matching subset index outside the subset range");
  }
  std::vector<SemSpec> specs(options.n_subsets, shared);
  for (const auto& p : options.perturbations) {
    if (p.subset >= options.n_subsets) throw Error(ErrorKind::invalid_argument, "perturbation subset out of range");
    if (p.subset == options.matching_subset) {
      throw Error(ErrorKind::invalid_argument, "the matching subset cannot be perturbed");
    }
    auto& edges = specs[p.subset].edges;
    const auto it = std::find_if(edges.begin(), edges.end(),
                                 [&](const SemEdge& e) { return e.child == p.child && e.parent == p.parent; });
    if (it == edges.end()) {
      throw Error(ErrorKind::invalid_argument, "perturbation of missing edge " + p.parent + " -> " + p.child);
    }
    it->weight *= p.factor;
  }
  for (const auto& o : options.offsets) {
    if (o.subset >= options.n_subsets) throw Error(ErrorKind::invalid_argument, "offset subset out of range");
    if (o.subset == options.matching_subset) {
      throw Error(ErrorKind::invalid_argument, "the matching subset cannot be perturbed");
    }
    specs[o.subset].noise[specs[o.subset].index_of(o.node)].offset += o.offset;
  }

  HeterogeneousWorld world;
  for (std::size_t k = 0; k < options.n_subsets; ++k) {
    specs[k].seed = derive_seed(options.seed, 1, k);
    world.subsets.push_back(sample_sem(specs[k], options.rows_per_subset, "s" + std::to_string(k) + "_"));
  }
  SemSpec global = shared;
  global.seed = derive_seed(options.seed, 2);
  world.global = sample_sem(global, options.global_rows, "g_");
  world.subset_specs = std::move(specs);
  world.true_global = shared.true_dag(shared.targets.empty() ? std::nullopt
                                                             : std::optional<std::string>(shared.targets.back()));
  return world;
}

SemSpec benchmark_sem() {
  SemSpec spec;
  for (int i = 1; i <= 9; ++i) spec.add_node("f" + std::to_string(i));
  spec.add_node("y");
  spec.add_edge("f2", "f1", 0.8);
  spec.add_edge("f3", "f2", 0.6);
  spec.add_edge("f4", "f1", -0.7);
  spec.add_edge("f5", "f3", 0.9);
  spec.add_edge("f6", "f4", 0.5);
  spec.add_edge("f7", "f5", -0.6);
  spec.add_edge("f8", "f6", 0.7);
  spec.add_edge("f9", "f2", 0.5);
  spec.add_edge("y", "f3", 0.6);
  spec.add_edge("y", "f7", 0.5);
  spec.add_edge("y", "f8", -0.4);
  spec.add_edge("y", "f9", 0.3);
  spec.targets = {"y"};
  return spec;
}

WorldOptions benchmark_world_options(std::uint64_t seed) {
  WorldOptions o;
  o.n_subsets = 3;
  o.matching_subset = 1;
  o.rows_per_subset = 1200;
  o.global_rows = 5000;
  o.seed = seed;
  o.perturbations = {
      {0, "f2", "f1", 2.5}, {0, "f5", "f3", 0.0}, {0, "f7", "f5", 2.0},
      {2, "f4", "f1", 0.0}, {2, "f6", "f4", 3.0}, {2, "f8", "f6", 2.0}, {2, "f9", "f2", 0.0},
  };
  return o;
}

DescriptorWorld descriptor_world(std::uint64_t seed) {
  static const std::vector<std::string> kDescriptors = {
      "MolLogP",         "TPSA",           "MolMR",         "MolWt",        "HeavyAtomCount",
      "NumHDonors",      "NumHAcceptors",  "NumRotatableBonds", "RingCount", "NumAromaticRings",
      "FractionCSP3",    "NumValenceElectrons", "MaxPartialCharge", "MinPartialCharge", "BertzCT",
      "LabuteASA",       "NumHeteroatoms", "HallKierAlpha", "Kappa1",       "Chi0v"};
  DescriptorWorld world;
  SemSpec& spec = world.spec;
  for (const auto& n : kDescriptors) spec.add_node(n);
  spec.add_node("polarizability");
  spec.add_node("dipole");
  spec.targets = {"polarizability", "dipole"};

  Rng rng(derive_seed(seed, 11));
  auto signed_weight = [&] { return (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.3, 0.8); };
  const std::size_t d = kDescriptors.size();
  for (std::size_t child = 3; child < d; ++child) {
    for (std::size_t parent = 0; parent < child; ++parent) {
      if (rng.uniform() < 0.12) spec.add_edge(kDescriptors[child], kDescriptors[parent], signed_weight());
    }
  }
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < d; ++i) idx[i] = i;
  for (auto i : rng.sample(idx, 8)) spec.add_edge("polarizability", kDescriptors[i], signed_weight());
  for (auto i : rng.sample(idx, 6)) spec.add_edge("dipole", kDescriptors[i], signed_weight());
  spec.noise[spec.index_of("dipole")].offset = 1.0;

  WorldOptions& o = world.options;
  o.n_subsets = 3;
  o.matching_subset = 1;
  o.rows_per_subset = 1500;
  o.global_rows = 4500;
  o.seed = seed;
  for (const auto& pivot : {"MolLogP", "TPSA", "MolMR"}) {
    o.offsets.push_back({0, pivot, -4.0});
    o.offsets.push_back({2, pivot, 4.0});
  }
  // Rescale a handful of descriptor edges in the non-matching subsets.
  std::size_t picked = 0;
  for (const auto& e : spec.edges) {
    if (e.child == "polarizability" || e.child == "dipole") continue;
    o.perturbations.push_back({picked % 2 == 0 ? std::size_t{0} : std::size_t{2}, e.child, e.parent,
                               picked % 3 == 0 ? 0.0 : 2.5});
    if (++picked == 8) break;
  }
  return world;
}

FingerprintTable synth_fingerprints(const FeatureTable& table, std::span<const std::string> columns, std::size_t width,
                                    std::uint64_t seed) {
  const Eigen::MatrixXd x = table.select_columns(columns).values();
  const auto d = x.cols();
  Rng rng(seed);
  Eigen::MatrixXd projection(static_cast<Eigen::Index>(width), d);
  for (Eigen::Index b = 0; b < projection.rows(); ++b) {
    for (Eigen::Index j = 0; j < d; ++j) projection(b, j) = rng.normal();
  }
  const double threshold = std::sqrt(static_cast<double>(d));
  FingerprintTable fps;
  fps.width = width;
  fps.row_ids = table.row_ids();
  const Eigen::MatrixXd scores = x * projection.transpose();
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Bitvector bv(width);
    for (Eigen::Index b = 0; b < scores.cols(); ++b) {
      if (scores(i, b) > threshold) bv.set(static_cast<std::size_t>(b));
    }
    fps.bits.push_back(std::move(bv));
  }
  return fps;
}

}  // namespace causal_al
