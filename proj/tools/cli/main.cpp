// Command line driver: spectra, verification grids, stability reports.

#include "sgt/inequalities.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace sgt;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// All numeric output goes through 12 significant digits so regression
// diffs are stable across runs and platforms.
std::string g12(double x) {
  if (x == 0.0) x = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double jnum(double x) { return std::strtod(g12(x).c_str(), nullptr); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse '" + s + "' as a number in " + what);
  }
}

int to_int(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse '" + s + "' as an integer in " + what);
  }
}

bool to_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw UsageError("cannot parse '" + s + "' as a boolean in " + what);
}

struct RunConfig {
  std::string fixture;
  std::string meshPath;
  std::string weightSpec = "zero";
  std::vector<int> degrees;
  int k = 12;
  int kmax = 5;
  std::vector<double> alphas = {1.5, 2.0, 3.0};
  std::string method = "auto";
  unsigned seed = 12345;
  double tolScale = 0.05;
  std::string outDir;
  std::string tag;
  bool all = false;
  bool includeZero = false;
  bool dumpOps = false;
  bool curvature = false;
  int maxl = 3;
  int jacobiP = 1;
  double gmN = -2.0;
  double gmGamma = 0;  // 0 = derive from the fixture's curvature
  bool haveL = false;
  double boundL = 0;
  bool haveL12 = false;
  double boundL1 = 0, boundL2 = 0;
};

struct FixtureInfo {
  std::string kind = "file";  // sphere | torus | disk | cap | patch | file
  double R = 0, r = 0;
};

SolveMethod parse_method(const std::string& m) {
  if (m == "auto") return SolveMethod::Auto;
  if (m == "lanczos") return SolveMethod::Lanczos;
  if (m == "dense") return SolveMethod::Dense;
  throw UsageError("unknown solver method '" + m + "'");
}

DomainMesh build_domain(const RunConfig& cfg, FixtureInfo& info) {
  if (!cfg.meshPath.empty()) {
    info.kind = "file";
    auto dot = cfg.meshPath.rfind('.');
    std::string ext = dot == std::string::npos ? "" : cfg.meshPath.substr(dot);
    MeshFormat fmt = ext == ".obj" ? MeshFormat::OBJ : MeshFormat::OFF;
    return whole_surface(load_mesh(cfg.meshPath, fmt));
  }
  if (cfg.fixture.empty())
    throw UsageError("either --fixture or --mesh is required");

  auto colon = cfg.fixture.find(':');
  std::string name = cfg.fixture.substr(0, colon);
  std::vector<std::string> args =
      colon == std::string::npos
          ? std::vector<std::string>{}
          : split(cfg.fixture.substr(colon + 1), ',');
  auto want = [&](size_t n) {
    if (args.size() != n)
      throw UsageError("fixture '" + name + "' takes " + std::to_string(n) +
                       " arguments, got " + std::to_string(args.size()));
  };
  info.kind = name;
  if (name == "sphere") {
    want(2);
    info.R = to_double(args[0], "fixture");
    return whole_surface(make_sphere(info.R, to_int(args[1], "fixture")));
  }
  if (name == "torus") {
    want(4);
    info.R = to_double(args[0], "fixture");
    info.r = to_double(args[1], "fixture");
    return whole_surface(make_torus(info.R, info.r, to_int(args[2], "fixture"),
                                    to_int(args[3], "fixture")));
  }
  if (name == "disk") {
    want(2);
    info.R = to_double(args[0], "fixture");
    return make_disk(info.R, to_int(args[1], "fixture"));
  }
  if (name == "cap") {
    want(3);
    info.R = to_double(args[0], "fixture");
    SurfaceMesh m = make_sphere(info.R, to_int(args[1], "fixture"));
    double z0 = to_double(args[2], "fixture");
    std::vector<char> keep(static_cast<size_t>(m.nV()));
    for (int v = 0; v < m.nV(); ++v)
      keep[static_cast<size_t>(v)] = m.vertices[static_cast<size_t>(v)].z() > z0;
    return extract_domain(m, keep);
  }
  if (name == "patch") {
    want(4);
    info.R = to_double(args[0], "fixture");
    info.r = to_double(args[1], "fixture");
    SurfaceMesh m = make_torus(info.R, info.r, to_int(args[2], "fixture"),
                               to_int(args[3], "fixture"));
    // Outer half-tube window. Keeping the whole tube would put the ridge
    // where the two windings of the base-point distance meet inside the
    // domain, and distance weights would stop being smooth there.
    std::vector<char> keep(static_cast<size_t>(m.nV()));
    for (int v = 0; v < m.nV(); ++v) {
      const Eigen::Vector3d& x = m.vertices[static_cast<size_t>(v)];
      keep[static_cast<size_t>(v)] =
          x.y() > 1e-9 && x.head<2>().norm() > info.R + 1e-9;
    }
    return extract_domain(m, keep);
  }
  throw UsageError("unknown fixture '" + name + "'");
}

WeightSpec build_weight_spec(const RunConfig& cfg, const FixtureInfo& info,
                             int nV) {
  WeightSpec spec;
  auto colon = cfg.weightSpec.find(':');
  std::string name = cfg.weightSpec.substr(0, colon);
  std::string rest =
      colon == std::string::npos ? "" : cfg.weightSpec.substr(colon + 1);

  if (name == "zero") {
    if (!rest.empty()) throw UsageError("weight 'zero' takes no arguments");
    spec.kind = WeightKind::Zero;
    return spec;
  }
  if (name == "radial") {
    spec.kind = WeightKind::Radial;
    spec.a = to_double(rest, "weight");
    if (!(spec.a > 0)) throw UsageError("radial weight needs a > 0");
    return spec;
  }
  if (name == "dist") {
    auto args = split(rest, ',');
    if (args.size() != 2)
      throw UsageError("distance weight spec is dist:x0,a");
    spec.kind = WeightKind::Distance;
    spec.basePoint = to_int(args[0], "weight");
    spec.a = to_double(args[1], "weight");
    if (spec.basePoint < 0 || spec.basePoint >= nV)
      throw UsageError("distance weight base vertex out of range");
    if (!(spec.a > 0)) throw UsageError("distance weight needs a > 0");
    if (cfg.haveL) {
      spec.bounds.sectional = false;
      spec.bounds.l = cfg.boundL;
    } else if (cfg.haveL12) {
      spec.bounds.sectional = true;
      spec.bounds.l1 = cfg.boundL1;
      spec.bounds.l2 = cfg.boundL2;
    } else if (info.kind == "sphere") {
      spec.bounds.sectional = false;
      spec.bounds.l = 1.0 / (info.R * info.R);
    } else if (info.kind == "cap") {
      spec.bounds.sectional = true;
      spec.bounds.l1 = 1.0 / (info.R * info.R);
      spec.bounds.l2 = 1.0 / (info.R * info.R);
    } else if (info.kind == "disk") {
      spec.bounds.sectional = false;
      spec.bounds.l = 0;
    } else if (info.kind == "torus" || info.kind == "patch") {
      spec.bounds.sectional = false;
      spec.bounds.l = -1.0 / (info.r * (info.R - info.r));
    } else {
      throw UsageError(
          "distance weight on a file mesh needs --l or --l1/--l2");
    }
    return spec;
  }
  if (name == "file") {
    if (rest.empty()) throw UsageError("weight 'file' needs a path");
    spec.kind = WeightKind::Custom;
    spec.samples = load_weight_samples(rest, nV);
    return spec;
  }
  throw UsageError("invalid weight spec '" + cfg.weightSpec + "'");
}

ordered_json canonical_config(const RunConfig& cfg, const std::string& cmd) {
  ordered_json j;
  j["command"] = cmd;
  if (!cfg.fixture.empty()) j["fixture"] = cfg.fixture;
  if (!cfg.meshPath.empty()) j["mesh"] = cfg.meshPath;
  j["weight"] = cfg.weightSpec;
  if (cfg.haveL) j["l"] = jnum(cfg.boundL);
  if (cfg.haveL12) {
    j["l1"] = jnum(cfg.boundL1);
    j["l2"] = jnum(cfg.boundL2);
  }
  j["p"] = cfg.degrees;
  if (cmd == "spectrum") j["k"] = cfg.k;
  if (cmd == "verify") {
    j["kmax"] = cfg.kmax;
    ordered_json a = ordered_json::array();
    for (double x : cfg.alphas) a.push_back(jnum(x));
    j["alpha"] = a;
    j["all"] = cfg.all;
    j["include-zero"] = cfg.includeZero;
    j["gm-n"] = jnum(cfg.gmN);
    j["gm-gamma"] = jnum(cfg.gmGamma);
    j["tol-scale"] = jnum(cfg.tolScale);
  }
  if (cmd == "jacobi") {
    j["maxl"] = cfg.maxl;
    j["jacobi-p"] = cfg.jacobiP;
  }
  j["method"] = cfg.method;
  j["seed"] = cfg.seed;
  j["out"] = cfg.outDir;
  if (!cfg.tag.empty()) j["tag"] = cfg.tag;
  return j;
}

ordered_json mesh_json(const Scene& s) {
  ordered_json j;
  j["vertices"] = s.mesh().nV();
  j["edges"] = s.mesh().nE();
  j["faces"] = s.mesh().nF();
  j["euler"] = s.mesh().eulerCharacteristic();
  j["closed"] = s.mesh().closed();
  j["domainVertices"] = static_cast<int>(s.dom.interiorVertices.size());
  j["domainEdges"] = static_cast<int>(s.dom.interiorEdges.size());
  j["domainFaces"] = static_cast<int>(s.dom.interiorFaces.size());
  return j;
}

ordered_json weight_json(const Scene& s) {
  ordered_json j;
  switch (s.weight.kind) {
    case WeightKind::Zero: j["kind"] = "zero"; break;
    case WeightKind::Radial: j["kind"] = "radial"; break;
    case WeightKind::Distance: j["kind"] = "distance"; break;
    case WeightKind::Custom: j["kind"] = "custom"; break;
  }
  j["a"] = jnum(s.weight.a);
  if (s.hasComparison) {
    j["basePoint"] = s.comparison.basePoint;
    if (s.comparison.bounds.sectional) {
      j["l1"] = jnum(s.comparison.bounds.l1);
      j["l2"] = jnum(s.comparison.bounds.l2);
    } else {
      j["l"] = jnum(s.comparison.bounds.l);
    }
    j["singularVertices"] = s.comparison.numSingular;
  }
  return j;
}

ordered_json report_json(const InequalityReport& r) {
  ordered_json j;
  j["id"] = r.id;
  j["inputs"] = r.inputs;
  j["direction"] = r.direction == Direction::LeftLeqRight ? "<=" : ">=";
  j["left"] = jnum(r.left);
  j["right"] = jnum(r.right);
  j["slack"] = jnum(r.slack);
  j["tolerance"] = jnum(r.tolerance);
  j["pass"] = r.pass;
  j["evaluated"] = r.evaluated;
  if (!r.note.empty()) j["note"] = r.note;
  ordered_json d = ordered_json::object();
  for (const auto& [key, val] : r.details) d[key] = jnum(val);
  j["details"] = d;
  return j;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("write to " + p.string() + " failed");
}

std::string dump_json(const ordered_json& j) { return j.dump(2) + "\n"; }

fs::path prepare_out(const RunConfig& cfg) {
  fs::path dir(cfg.outDir);
  fs::create_directories(dir);
  return dir;
}

// Reports carry a 5% default tolerance; an override rescales every
// relative tolerance but leaves the counting estimates (fixed absolute
// tolerances) alone.
void apply_tol_scale(std::vector<InequalityReport>& reports, double scale) {
  if (scale == 0.05) return;
  for (auto& r : reports) {
    if (r.id.rfind("stability_", 0) == 0 || r.id == "vanishing_criterion")
      continue;
    r.tolerance = scale * std::max(std::abs(r.left), std::abs(r.right)) + 1e-12;
    r.pass = !r.evaluated || r.slack >= -r.tolerance;
  }
}

void dump_operators(const Scene& s, const fs::path& dir) {
  auto coord = [](const SpMat& M) {
    std::ostringstream os;
    for (int c = 0; c < M.outerSize(); ++c)
      for (SpMat::InnerIterator it(M, c); it; ++it)
        os << it.row() << " " << it.col() << " " << g12(it.value()) << "\n";
    return os.str();
  };
  auto diag = [](const Eigen::VectorXd& v) {
    std::ostringstream os;
    for (int i = 0; i < v.size(); ++i) os << i << " " << g12(v[i]) << "\n";
    return os.str();
  };
  write_file(dir / "d0.txt", coord(s.ops.d0));
  write_file(dir / "d1.txt", coord(s.ops.d1));
  for (int p = 0; p <= 2; ++p) {
    write_file(dir / ("star" + std::to_string(p) + ".txt"), diag(s.ops.star[static_cast<size_t>(p)]));
    write_file(dir / ("wstar" + std::to_string(p) + ".txt"),
               diag(s.ops.starF[static_cast<size_t>(p)]));
  }
}

Scene build_scene(const RunConfig& cfg, FixtureInfo& info) {
  DomainMesh dom = build_domain(cfg, info);
  WeightSpec ws = build_weight_spec(cfg, info, dom.mesh.nV());
  return make_scene(std::move(dom), ws);
}

int cmd_spectrum(const RunConfig& cfg) {
  FixtureInfo info;
  Scene s = build_scene(cfg, info);
  fs::path dir = prepare_out(cfg);
  SolveMethod method = parse_method(cfg.method);

  ordered_json meta;
  meta["command"] = "spectrum";
  meta["config"] = canonical_config(cfg, "spectrum");
  meta["mesh"] = mesh_json(s);
  meta["weight"] = weight_json(s);
  ordered_json solves = ordered_json::array();

  for (int p : cfg.degrees) {
    OperatorPair pair = s.dom.wholeSurface()
                            ? full_pair(s.ops, p)
                            : dirichlet_restrict(s.ops, s.dom, p);
    int k = std::min(cfg.k, pair.dim());
    SpectrumResult spec = solve(pair, k, method, cfg.seed);
    classify(spec, s.ops, pair, p);

    std::ostringstream csv;
    csv << "index,eigenvalue,class,residual_d,residual_delta\n";
    for (int i = 0; i < k; ++i)
      csv << i << "," << g12(spec.eigenvalues[i]) << ","
          << to_string(spec.tags[static_cast<size_t>(i)]) << ","
          << g12(spec.residualD[i]) << "," << g12(spec.residualDelta[i])
          << "\n";
    write_file(dir / ("spectrum_p" + std::to_string(p) + ".csv"), csv.str());

    ordered_json sj;
    sj["p"] = p;
    sj["requested"] = k;
    sj["method"] = spec.method;
    sj["shift"] = jnum(spec.shift);
    sj["solveResidual"] =
        jnum(spec.solveResidual.size() ? spec.solveResidual.maxCoeff() : 0.0);
    sj["kernelDim"] = spec.kernelDim;
    sj["kernelTol"] = jnum(spec.kernelTol);
    solves.push_back(sj);
  }
  meta["solves"] = solves;
  write_file(dir / "meta.json", dump_json(meta));
  if (cfg.dumpOps) dump_operators(s, dir);
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  FixtureInfo info;
  Scene s = build_scene(cfg, info);
  fs::path dir = prepare_out(cfg);
  SolveMethod method = parse_method(cfg.method);
  std::vector<InequalityReport> reports;

  for (int p : cfg.degrees) {
    int dim = s.dom.wholeSurface()
                  ? s.ops.dim(p)
                  : static_cast<int>(p == 0 ? s.dom.interiorVertices.size()
                                     : p == 1 ? s.dom.interiorEdges.size()
                                              : s.dom.interiorFaces.size());
    int count = std::min(dim, cfg.kmax + 6);
    if (count < 2) continue;
    ModeSet ms = compute_modes(s, p, count, method, cfg.seed);
    for (double alpha : cfg.alphas) {
      for (int k = 1; k <= std::min(cfg.kmax, ms.count() - 1); ++k) {
        reports.push_back(yang_recursion(s, ms, k, alpha));
        reports.push_back(extremal_recursion(s, ms, k, alpha));
        if (s.weight.kind == WeightKind::Radial)
          reports.push_back(radial_recursion(s, ms, k, alpha));
        if (s.weight.kind == WeightKind::Distance && s.hasComparison)
          reports.push_back(distance_weight_bounds(s, ms, k, alpha));
      }
    }
  }

  if (cfg.all) {
    double gamma = cfg.gmGamma;
    if (gamma == 0) {
      double minK = std::numeric_limits<double>::infinity();
      for (int v : s.dom.interiorVertices) minK = std::min(minK, s.curv.K[v]);
      gamma = minK > 0 ? 0.9 * minK : 1.0;
    }
    for (int p : cfg.degrees) {
      if (p >= 1) {
        reports.push_back(
            first_eigenvalue_gap(s, p, cfg.includeZero, method, cfg.seed));
        if (s.closed()) {
          reports.push_back(exact_eigenvalue_upper(s, p, method, cfg.seed));
          reports.push_back(gallot_meyer_f(s, p, cfg.gmN, gamma, method, cfg.seed));
        }
      }
      if (s.closed()) reports.push_back(vanishing_check(s, p, method, cfg.seed));
    }
  }

  apply_tol_scale(reports, cfg.tolScale);

  bool allPass = true;
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) {
    allPass = allPass && r.pass;
    arr.push_back(report_json(r));
  }
  ordered_json out;
  out["command"] = "verify";
  out["config"] = canonical_config(cfg, "verify");
  out["mesh"] = mesh_json(s);
  out["weight"] = weight_json(s);
  out["reports"] = arr;
  out["allPass"] = allPass;
  std::string name = cfg.tag.empty() ? "verify.json" : "verify_" + cfg.tag + ".json";
  write_file(dir / name, dump_json(out));
  return allPass ? 0 : 1;
}

int cmd_jacobi(const RunConfig& cfg) {
  FixtureInfo info;
  Scene s = build_scene(cfg, info);
  fs::path dir = prepare_out(cfg);
  auto [res, reports] =
      jacobi_stability(s, cfg.jacobiP, cfg.maxl, parse_method(cfg.method), cfg.seed);
  apply_tol_scale(reports, cfg.tolScale);

  bool allPass = true;
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) {
    allPass = allPass && r.pass;
    arr.push_back(report_json(r));
  }
  ordered_json out;
  out["command"] = "jacobi";
  out["config"] = canonical_config(cfg, "jacobi");
  out["mesh"] = mesh_json(s);
  out["weight"] = weight_json(s);
  out["index"] = res.index;
  out["hFsup"] = jnum(res.hFsup);
  out["fMinimal"] = res.fMinimal;
  out["gammaM"] = jnum(res.gammaM);
  out["a"] = jnum(res.a);
  out["dTable"] = res.dTable;
  ordered_json spectrum = ordered_json::array();
  for (int i = 0; i < res.spectrum.size(); ++i)
    spectrum.push_back(jnum(res.spectrum[i]));
  out["spectrum"] = spectrum;
  out["reports"] = arr;
  out["allPass"] = allPass;
  std::string name = cfg.tag.empty() ? "jacobi.json" : "jacobi_" + cfg.tag + ".json";
  write_file(dir / name, dump_json(out));
  return allPass ? 0 : 1;
}

int cmd_report(const RunConfig& cfg) {
  fs::path dir(cfg.outDir);
  bool wroteCurvature = false;
  if (cfg.curvature) {
    if (cfg.fixture.empty() && cfg.meshPath.empty())
      throw UsageError("--curvature needs --fixture or --mesh");
    FixtureInfo info;
    DomainMesh dom = build_domain(cfg, info);
    CurvatureField c = estimate_curvature(dom.mesh);
    fs::create_directories(dir);
    std::ostringstream csv;
    csv << "vertex,x,y,z,k1,k2,H,K,scal\n";
    for (int v = 0; v < dom.mesh.nV(); ++v) {
      const Eigen::Vector3d& x = dom.mesh.vertices[static_cast<size_t>(v)];
      csv << v << "," << g12(x.x()) << "," << g12(x.y()) << "," << g12(x.z())
          << "," << g12(c.k1[v]) << "," << g12(c.k2[v]) << "," << g12(c.H[v])
          << "," << g12(c.K[v]) << "," << g12(c.scal[v]) << "\n";
    }
    write_file(dir / "curvature.csv", csv.str());
    wroteCurvature = true;
  }

  struct Entry {
    std::string file;
    int vertices = 0;
    ordered_json reports;
  };
  std::vector<Entry> entries;
  if (fs::is_directory(dir)) {
    std::vector<fs::path> names;
    for (const auto& de : fs::directory_iterator(dir))
      if (de.path().extension() == ".json") names.push_back(de.path());
    std::sort(names.begin(), names.end());
    for (const auto& p : names) {
      std::ifstream in(p);
      ordered_json j;
      try {
        in >> j;
      } catch (const std::exception&) {
        continue;
      }
      if (!j.contains("reports")) continue;
      Entry e;
      e.file = p.filename().string();
      e.vertices = j.value("mesh", ordered_json::object()).value("vertices", 0);
      e.reports = j["reports"];
      entries.push_back(std::move(e));
    }
  }
  if (entries.empty()) {
    if (wroteCurvature) return 0;
    throw std::runtime_error("nothing to report: no verification output in '" +
                             cfg.outDir + "'");
  }

  struct Row {
    std::string id, inputs, file;
    int vertices = 0;
    double slack = 0, tolerance = 0, left = 0, right = 0;
    bool pass = true, evaluated = true;
  };
  std::vector<Row> rows;
  for (const auto& e : entries)
    for (const auto& rj : e.reports) {
      Row r;
      r.id = rj.value("id", "?");
      r.inputs = rj.value("inputs", "");
      r.file = e.file;
      r.vertices = e.vertices;
      r.slack = rj.value("slack", 0.0);
      r.tolerance = rj.value("tolerance", 0.0);
      r.left = rj.value("left", 0.0);
      r.right = rj.value("right", 0.0);
      r.pass = rj.value("pass", false);
      r.evaluated = rj.value("evaluated", true);
      rows.push_back(std::move(r));
    }

  std::map<std::string, std::vector<const Row*>> byId;
  for (const auto& r : rows) byId[r.id].push_back(&r);

  int failed = 0, skipped = 0;
  for (const auto& r : rows) {
    if (!r.pass) ++failed;
    if (!r.evaluated) ++skipped;
  }

  std::ostringstream txt;
  txt << "verification report\n";
  txt << "sources: " << entries.size() << " file(s)\n";
  for (const auto& e : entries)
    txt << "  " << e.file << ": " << e.reports.size()
        << " reports, vertices=" << e.vertices << "\n";
  txt << "reports: " << rows.size() << " total, " << rows.size() - failed
      << " passed, " << failed << " failed, " << skipped
      << " not evaluated (hypothesis unmet)\n";
  txt << "by estimate:\n";
  for (const auto& [id, list] : byId) {
    int pass = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (const Row* r : list) {
      if (r->pass) ++pass;
      if (r->evaluated) worst = std::min(worst, r->slack);
    }
    txt << "  " << id << ": " << pass << "/" << list.size() << " pass";
    if (worst != std::numeric_limits<double>::infinity())
      txt << ", worst slack " << g12(worst);
    txt << "\n";
  }
  if (failed > 0) {
    txt << "failures:\n";
    for (const auto& r : rows)
      if (!r.pass)
        txt << "  " << r.id << " [" << r.inputs << "] left=" << g12(r.left)
            << " right=" << g12(r.right) << " slack=" << g12(r.slack)
            << " tolerance=" << g12(r.tolerance) << "\n";
  }
  txt << (failed == 0 ? "ALL PASS\n" : "FAILED\n");
  write_file(dir / "report.txt", txt.str());

  // gnuplot blocks: one index per estimate id, slack against mesh size.
  std::ostringstream dat;
  dat << "# slack vs mesh size, one index block per estimate id\n";
  dat << "# columns: vertices slack tolerance pass\n";
  bool first = true;
  for (const auto& [id, list] : byId) {
    std::vector<const Row*> sorted(list);
    std::sort(sorted.begin(), sorted.end(), [](const Row* a, const Row* b) {
      return std::tie(a->vertices, a->inputs, a->file) <
             std::tie(b->vertices, b->inputs, b->file);
    });
    if (!first) dat << "\n\n";
    first = false;
    dat << "# id = " << id << "\n";
    for (const Row* r : sorted)
      dat << r->vertices << " " << g12(r->slack) << " " << g12(r->tolerance)
          << " " << (r->pass ? 1 : 0) << "\n";
  }
  write_file(dir / "slack.dat", dat.str());
  return failed == 0 ? 0 : 1;
}

// Plain key = value config file; command line flags win over file values.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  auto trim = [](std::string s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line is not key = value: '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("empty config key");
    if (kv.count(key)) throw UsageError("duplicate config key '" + key + "'");
    kv[key] = val;
  }
  return kv;
}

struct ConfigBinding {
  std::string key;
  std::string optName;
  std::function<void(const std::string&)> set;
};

void apply_config(CLI::App* sub, RunConfig& cfg,
                  const std::map<std::string, std::string>& kv,
                  bool& weightFromConfig, bool& outFromConfig) {
  std::vector<ConfigBinding> binds = {
      {"fixture", "--fixture", [&](const std::string& v) { cfg.fixture = v; }},
      {"mesh", "--mesh", [&](const std::string& v) { cfg.meshPath = v; }},
      {"weight", "--weight",
       [&](const std::string& v) {
         cfg.weightSpec = v;
         weightFromConfig = true;
       }},
      {"p", "--degrees",
       [&](const std::string& v) {
         cfg.degrees.clear();
         for (const auto& t : split(v, ',')) cfg.degrees.push_back(to_int(t, "config p"));
       }},
      {"k", "--count", [&](const std::string& v) { cfg.k = to_int(v, "config k"); }},
      {"kmax", "--kmax", [&](const std::string& v) { cfg.kmax = to_int(v, "config kmax"); }},
      {"alpha", "--alpha",
       [&](const std::string& v) {
         cfg.alphas.clear();
         for (const auto& t : split(v, ',')) cfg.alphas.push_back(to_double(t, "config alpha"));
       }},
      {"method", "--method", [&](const std::string& v) {
         parse_method(v);
         cfg.method = v;
       }},
      {"seed", "--seed",
       [&](const std::string& v) { cfg.seed = static_cast<unsigned>(to_int(v, "config seed")); }},
      {"tol-scale", "--tol-scale",
       [&](const std::string& v) { cfg.tolScale = to_double(v, "config tol-scale"); }},
      {"out", "--out",
       [&](const std::string& v) {
         cfg.outDir = v;
         outFromConfig = true;
       }},
      {"tag", "--tag", [&](const std::string& v) { cfg.tag = v; }},
      {"all", "--all", [&](const std::string& v) { cfg.all = to_bool(v, "config all"); }},
      {"include-zero", "--include-zero",
       [&](const std::string& v) { cfg.includeZero = to_bool(v, "config include-zero"); }},
      {"dump-ops", "--dump-ops",
       [&](const std::string& v) { cfg.dumpOps = to_bool(v, "config dump-ops"); }},
      {"curvature", "--curvature",
       [&](const std::string& v) { cfg.curvature = to_bool(v, "config curvature"); }},
      {"maxl", "--maxl", [&](const std::string& v) { cfg.maxl = to_int(v, "config maxl"); }},
      {"jacobi-p", "--jacobi-p",
       [&](const std::string& v) { cfg.jacobiP = to_int(v, "config jacobi-p"); }},
      {"gm-n", "--gm-n", [&](const std::string& v) { cfg.gmN = to_double(v, "config gm-n"); }},
      {"gm-gamma", "--gm-gamma",
       [&](const std::string& v) { cfg.gmGamma = to_double(v, "config gm-gamma"); }},
      {"l", "--l",
       [&](const std::string& v) {
         cfg.boundL = to_double(v, "config l");
         cfg.haveL = true;
       }},
      {"l1", "--l1",
       [&](const std::string& v) {
         cfg.boundL1 = to_double(v, "config l1");
         cfg.haveL12 = true;
       }},
      {"l2", "--l2",
       [&](const std::string& v) {
         cfg.boundL2 = to_double(v, "config l2");
         cfg.haveL12 = true;
       }},
  };
  for (const auto& [key, val] : kv) {
    const ConfigBinding* b = nullptr;
    for (const auto& cand : binds)
      if (cand.key == key) {
        b = &cand;
        break;
      }
    CLI::Option* opt = b ? sub->get_option_no_throw(b->optName) : nullptr;
    if (!opt)
      throw UsageError("unknown config key '" + key + "' for this command");
    if (opt->count() == 0) b->set(val);
  }
}

void emit_error(const std::string& kind, const std::string& message) {
  ordered_json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  std::fputs((j.dump() + "\n").c_str(), stderr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted Hodge Laplacian spectra and eigenvalue estimates on triangulated surfaces"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string configPath;

  auto addCommon = [&](CLI::App* sub, bool withDegrees) {
    sub->add_option("--config", configPath, "key = value config file; flags win");
    sub->add_option("--fixture", cfg.fixture,
                    "sphere:R,level | torus:R,r,nu,nv | disk:R,level | "
                    "cap:R,level,z0 | patch:R,r,nu,nv");
    sub->add_option("--mesh", cfg.meshPath, "OFF or OBJ mesh file");
    sub->add_option("--weight", cfg.weightSpec,
                    "zero | radial:a | dist:x0,a | file:path");
    sub->add_option("--l", cfg.boundL, "Ricci comparison bound for distance weights")
        ->each([&](const std::string&) { cfg.haveL = true; });
    sub->add_option("--l1", cfg.boundL1, "lower sectional bound")
        ->each([&](const std::string&) { cfg.haveL12 = true; });
    sub->add_option("--l2", cfg.boundL2, "upper sectional bound")
        ->each([&](const std::string&) { cfg.haveL12 = true; });
    sub->add_option("--method", cfg.method, "auto | lanczos | dense")
        ->check(CLI::IsMember({"auto", "lanczos", "dense"}));
    sub->add_option("--seed", cfg.seed, "solver seed");
    sub->add_option("--out", cfg.outDir, "output directory (env SGT_OUT)");
    sub->add_option("--tag", cfg.tag, "suffix for the output file name");
    if (withDegrees)
      sub->add_option("-p,--degrees", cfg.degrees, "form degrees")
          ->delimiter(',')
          ->check(CLI::Range(0, 2));
  };

  CLI::App* spectrum = app.add_subcommand("spectrum", "solve and classify eigenvalues");
  addCommon(spectrum, true);
  spectrum->add_option("-k,--count", cfg.k, "eigenpairs per degree")
      ->check(CLI::PositiveNumber);
  spectrum->add_flag("--dump-ops", cfg.dumpOps,
                     "write operators as coordinate text");

  CLI::App* verify = app.add_subcommand("verify", "run the estimate battery");
  addCommon(verify, true);
  verify->add_option("--kmax", cfg.kmax, "largest recursion order")
      ->check(CLI::PositiveNumber);
  verify->add_option("--alpha", cfg.alphas, "recursion exponents")->delimiter(',');
  verify->add_flag("--all", cfg.all, "also run gap/upper/vanishing/Gallot-Meyer");
  verify->add_flag("--include-zero", cfg.includeZero,
                   "gap estimate counts zero modes as first eigenvalues");
  verify->add_option("--gm-n", cfg.gmN, "Gallot-Meyer dimension parameter");
  verify->add_option("--gm-gamma", cfg.gmGamma,
                     "Gallot-Meyer curvature constant (0 = from fixture)");
  verify->add_option("--tol-scale", cfg.tolScale,
                     "relative tolerance scale for pass/fail")
      ->check(CLI::PositiveNumber);

  CLI::App* jacobi = app.add_subcommand("jacobi", "stability operator and index bounds");
  addCommon(jacobi, false);
  jacobi->add_option("-p,--jacobi-p", cfg.jacobiP, "form degree for the comparison")
      ->check(CLI::Range(1, 2));
  jacobi->add_option("--maxl", cfg.maxl, "rows of the eigenvalue comparison table")
      ->check(CLI::PositiveNumber);
  jacobi->add_option("--tol-scale", cfg.tolScale,
                     "relative tolerance scale for pass/fail")
      ->check(CLI::PositiveNumber);

  CLI::App* report = app.add_subcommand("report", "aggregate verification output");
  addCommon(report, false);
  report->add_flag("--curvature", cfg.curvature,
                   "also dump per-vertex curvature CSV for the fixture");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    emit_error("config", e.what());
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    bool weightFromConfig = false, outFromConfig = false;
    if (!configPath.empty())
      apply_config(sub, cfg, read_config_file(configPath), weightFromConfig,
                   outFromConfig);

    // Output directory precedence: flag, then environment, then config
    // file, then the default.
    CLI::Option* outOpt = sub->get_option_no_throw("--out");
    if (!outOpt || outOpt->count() == 0) {
      const char* env = std::getenv("SGT_OUT");
      if (env && *env)
        cfg.outDir = env;
      else if (!outFromConfig)
        cfg.outDir = "out";
    }
    if (cfg.degrees.empty()) cfg.degrees = {0, 1, 2};
    if (!cfg.tag.empty() &&
        cfg.tag.find_first_not_of("abcdefghijklmnopqrstuvwxyz"
                                  "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
            std::string::npos)
      throw UsageError("tag may contain only letters, digits, '_' and '-'");
    if (sub == jacobi) {
      CLI::Option* w = sub->get_option_no_throw("--weight");
      if ((!w || w->count() == 0) && !weightFromConfig) cfg.weightSpec = "radial:1";
    }

    if (sub == spectrum) return cmd_spectrum(cfg);
    if (sub == verify) return cmd_verify(cfg);
    if (sub == jacobi) return cmd_jacobi(cfg);
    return cmd_report(cfg);
  } catch (const UsageError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("runtime", e.what());
    return 3;
  }
}
