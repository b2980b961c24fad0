#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pacbound/dataset.hpp"
#include "pacbound/errors.hpp"
#include "pacbound/inductive.hpp"
#include "pacbound/relative.hpp"
#include "pacbound/reproduce.hpp"
#include "pacbound/scalar.hpp"
#include "pacbound/svm.hpp"
#include "pacbound/threshold.hpp"
#include "pacbound/transductive.hpp"

namespace {

using nlohmann::json;
using namespace pacbound;

// exit codes: 0 ok, 1 regression failure, 2 validation, 3 capacity, 4 non-separable
constexpr int kExitRegression = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitNonSeparable = 4;

json report_to_json(const BoundReport& rep) {
  json j;
  j["method"] = rep.method;
  j["inputs"] = rep.inputs;
  j["bound"] = rep.bound;
  j["clipped"] = rep.clipped;
  j["vacuous"] = rep.vacuous;
  if (rep.lambda_opt) j["lambda_opt"] = *rep.lambda_opt;
  if (rep.k_opt) j["k_opt"] = *rep.k_opt;
  if (rep.infinite) j["infinite"] = true;
  if (!rep.extras.empty()) j["extras"] = rep.extras;
  return j;
}

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw ValidationError("cannot open output file " + out_path);
    out << j.dump(2) << "\n";
  }
}

struct BoundArgs {
  std::string method;
  int n = 0;
  int k = 1;
  int h = 0;
  int errors = -1;
  double q = -1.0;
  double epsilon = 0.05;
  double kl = 0.0;
  double lambda = 0.0;
  double alpha = 1.1;
  double beta = 0.0;
  double gamma = 0.0;
  double d = -1.0;
  double r_min = 0.0;
  double d_e = 0.0;
  double d_eta = 0.0;
  double eta = 0.0;
  double extra_kl = 0.0;
  std::string out;
};

double rate_of(const BoundArgs& a) {
  if (a.errors >= 0) {
    if (a.n < 1 || a.errors > a.n) throw ValidationError("--errors must lie in [0, N]");
    return double(a.errors) / a.n;
  }
  if (a.q >= 0.0) return a.q;
  throw ValidationError("missing --errors (or --q) for method " + a.method);
}

double complexity_of(const BoundArgs& a, long long points) {
  if (a.d >= 0.0) return a.d;
  if (a.h >= 1) return vc_trace_log(a.h, points);
  throw ValidationError("missing --d or --h for method " + a.method);
}

int run_bound(const BoundArgs& a) {
  BoundReport rep;
  const std::string& m = a.method;
  if (m == "single_rule") {
    rep = single_rule_bound(a.n, rate_of(a), a.epsilon);
  } else if (m == "deviation") {
    rep = deviation_bound(a.n, rate_of(a), a.kl, a.epsilon, a.lambda);
  } else if (m == "deviation_grid") {
    rep = deviation_bound_grid(a.n, rate_of(a), a.kl, a.epsilon, a.alpha);
  } else if (m == "mean_risk") {
    rep = mean_risk_bound(a.n, rate_of(a), a.kl, a.lambda);
  } else if (m == "mean_risk_opt") {
    rep = mean_risk_bound_opt(a.n, rate_of(a), a.kl);
  } else if (m == "sqrt_risk") {
    rep = sqrt_risk_bound(a.n, rate_of(a), a.d >= 0.0 ? a.d : a.kl);
  } else if (m == "dim_margin") {
    rep = dim_margin_risk(a.n, a.r_min, a.d_eta, a.eta);
  } else if (m == "local") {
    rep = local_bound(a.n, a.alpha, a.gamma, a.epsilon, a.r_min, a.d_e, a.extra_kl);
  } else if (m == "local_beta") {
    rep = local_bound_beta(a.n, a.beta, a.epsilon, a.r_min, a.d_e, a.extra_kl);
  } else if (m == "trans") {
    rep = trans_bound(a.n, a.k, rate_of(a), complexity_of(a, (long long)(a.k + 1) * a.n),
                      a.epsilon);
  } else if (m == "trans_k1") {
    rep = trans_bound_k1(a.n, rate_of(a), complexity_of(a, 2LL * a.n), a.epsilon);
  } else if (m == "trans_k1_exch") {
    rep = trans_bound_k1_exch(a.n, rate_of(a), complexity_of(a, 2LL * a.n), a.epsilon);
  } else if (m == "inductive_main") {
    rep = inductive_main_bound(a.n, rate_of(a), a.h, a.epsilon);
  } else if (m == "inductive_grid") {
    rep = inductive_grid_bound(a.n, rate_of(a), a.h, a.epsilon, a.alpha);
  } else if (m == "inductive_gaussian") {
    rep = inductive_gaussian(a.n, rate_of(a), a.h, a.epsilon);
  } else if (m == "iid_k1") {
    rep = iid_k1_bound(a.n, rate_of(a), a.h, a.epsilon);
  } else if (m == "iid_k1_gaussian") {
    rep = iid_k1_gaussian(a.n, rate_of(a), a.h, a.epsilon);
  } else if (m == "vapnik_baseline") {
    rep = vapnik_baseline(a.n, rate_of(a), a.h, a.epsilon);
  } else if (m == "svm_trans") {
    rep = svm_transductive_bound(a.n, a.k, rate_of(a), a.h, a.epsilon);
  } else {
    throw ValidationError("unknown method '" + m + "'");
  }
  emit(report_to_json(rep), a.out);
  return 0;
}

int run_reproduce(const std::string& only, const std::string& out) {
  const auto rows = reproduce_rows(only);
  if (rows.empty()) throw ValidationError("no rows match '" + only + "'");
  std::ostringstream table;
  table << "id            description                          expected     computed     |delta|  "
           "  status\n";
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-13s %-36s %12.6f %12.6f %10.2e  %s\n", r.id.c_str(),
                  r.description.c_str(), r.expected, r.computed, std::abs(r.computed - r.expected),
                  r.pass ? "pass" : "FAIL");
    table << line;
  }
  if (out.empty()) {
    std::cout << table.str();
  } else {
    std::ofstream os(out);
    os << table.str();
  }
  return all_pass(rows) ? 0 : kExitRegression;
}

struct ThresholdArgs {
  std::string action;
  std::string data;
  std::string shadow;
  std::string query;
  bool transductive = false;
  double lambda = 0.0;
  double epsilon = 0.05;
  double alpha = 1.1;
  double cap = 1e8;
  std::string out;
};

int run_threshold(const ThresholdArgs& a) {
  LabeledDataset ds = load_csv_file(a.data);
  if (!a.shadow.empty()) append_shadow(ds, load_csv_file(a.shadow));
  const bool transductive = a.transductive || ds.shadow_count() > 0;
  CellGrid grid(ds, transductive, a.cap);
  json j;
  j["n"] = grid.train_count();
  j["h"] = grid.dims();
  j["labels"] = grid.label_count();
  j["vertices"] = grid.vertex_count();
  j["transductive"] = grid.transductive();
  if (a.action == "fit") {
    const ThetaRef erm = grid.erm();
    j["lambda"] = a.lambda;
    j["log_partition"] = grid.log_partition(a.lambda);
    j["gibbs_risk"] = grid.gibbs_risk(a.lambda);
    j["r_min"] = erm.risk;
    j["erm_thresholds"] = erm.thresholds;
    j["erm_cell_labels"] = erm.cell_labels;
  } else if (a.action == "predict") {
    if (a.query.empty()) throw ValidationError("predict needs --query");
    const LabeledDataset q = load_csv_file(a.query);
    if (q.dims() != grid.dims()) throw ValidationError("query dimension mismatch");
    j["lambda"] = a.lambda;
    json rows = json::array();
    for (int i = 0; i < q.rows(); ++i) {
      const Eigen::VectorXd proba = grid.predict_proba(a.lambda, q.patterns.row(i));
      rows.push_back(std::vector<double>(proba.data(), proba.data() + proba.size()));
    }
    j["proba"] = rows;
  } else if (a.action == "dimension") {
    j["d_e"] = grid.empirical_dimension(default_beta_grid(grid.train_count()));
    j["r_min"] = grid.erm().risk;
  } else if (a.action == "bound") {
    const double risk = grid.gibbs_risk(a.lambda);
    const double kl = grid.kl_between_gibbs(a.lambda, 0.0);
    BoundReport rep = deviation_bound_grid(grid.train_count(), risk, kl, a.epsilon, a.alpha);
    j["lambda"] = a.lambda;
    j["gibbs_risk"] = risk;
    j["kl"] = kl;
    j["report"] = report_to_json(rep);
  } else {
    throw ValidationError("unknown threshold action '" + a.action + "'");
  }
  emit(j, a.out);
  return 0;
}

struct SvmArgs {
  std::string action;
  std::string data;
  std::string model;
  std::string kernel = "linear";
  std::string mode = "canonical";
  std::string method = "trans";
  double c = 1.0;
  double tol = 1e-8;
  double epsilon = 0.05;
  int k = 1;
  int h = 0;
  int h_max = 0;
  int n = 0;
  int errors = -1;
  std::string out;
};

json model_to_json(const SvmModel& model, const std::vector<double>& alpha,
                   const std::vector<int>& y) {
  json j;
  j["kernel"] = model.kernel.describe();
  json pts = json::array();
  for (Eigen::Index i = 0; i < model.support_points.rows(); ++i) {
    pts.push_back(std::vector<double>(model.support_points.row(i).begin(),
                                      model.support_points.row(i).end()));
  }
  j["support_points"] = pts;
  j["alpha"] = alpha;
  j["labels"] = y;
  j["bias"] = model.bias;
  j["c"] = model.box_c;
  return j;
}

SvmModel model_from_json(const json& j, std::vector<double>* alpha_out = nullptr) {
  SvmModel model;
  model.kernel = Kernel::parse(j.at("kernel").get<std::string>());
  const auto pts = j.at("support_points");
  const auto alpha = j.at("alpha").get<std::vector<double>>();
  const auto labels = j.at("labels").get<std::vector<int>>();
  model.support_points.resize(pts.size(), pts.empty() ? 0 : pts[0].size());
  model.coeffs.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto row = pts[i].get<std::vector<double>>();
    for (std::size_t d = 0; d < row.size(); ++d) model.support_points(i, d) = row[d];
    model.coeffs[i] = alpha[i] * labels[i];
  }
  model.bias = j.at("bias").get<double>();
  // infinity (the canonical, box-free solution) serializes as null
  model.box_c = j.at("c").is_null() ? std::numeric_limits<double>::infinity()
                                    : j.at("c").get<double>();
  if (alpha_out) *alpha_out = alpha;
  return model;
}

int run_svm(const SvmArgs& a) {
  json j;
  if (a.action == "train") {
    LabeledDataset ds = load_csv_file(a.data);
    ds.validate_svm();
    const Kernel kernel = Kernel::parse(a.kernel);
    const Eigen::MatrixXd g = gram(kernel, ds.patterns.topRows(ds.train_count));
    std::vector<int> y(ds.labels.begin(), ds.labels.begin() + ds.train_count);

    DualSolution dual;
    json extra;
    if (a.mode == "canonical") {
      const CanonicalSolution sol = solve_canonical(g, y, a.tol);
      dual = sol.dual;
      extra["margin"] = sol.margin.margin;
      extra["norm_sq"] = sol.margin.norm_sq;
      extra["h_margin"] = sol.margin.h_margin;
      extra["radius_sq"] = sol.margin.radius_sq;
      extra["duality_gap"] = sol.duality_gap;
    } else if (a.mode == "box") {
      dual = solve_box(g, y, a.c, a.tol);
    } else {
      throw ValidationError("unknown svm mode '" + a.mode + "'");
    }
    SvmModel model;
    model.kernel = kernel;
    model.bias = dual.bias;
    model.box_c = dual.box_c;
    model.support_points.resize(dual.support.size(), ds.dims());
    model.coeffs.resize(dual.support.size());
    std::vector<double> alpha;
    std::vector<int> sv_labels;
    for (std::size_t s = 0; s < dual.support.size(); ++s) {
      const int i = dual.support[s];
      model.support_points.row(s) = ds.patterns.row(i);
      model.coeffs[s] = dual.alpha[i] * y[i];
      alpha.push_back(dual.alpha[i]);
      sv_labels.push_back(y[i]);
    }
    j = model_to_json(model, alpha, sv_labels);
    j["objective"] = dual.objective;
    j["kkt_residual"] = dual.kkt_residual;
    j["converged"] = dual.converged;
    for (auto& [key, val] : extra.items()) j[key] = val;
  } else if (a.action == "eval") {
    if (a.model.empty()) throw ValidationError("eval needs --model");
    std::ifstream in(a.model);
    if (!in) throw ValidationError("cannot open model " + a.model);
    json mj = json::parse(in);
    const SvmModel model = model_from_json(mj);
    LabeledDataset ds = load_csv_file(a.data);
    ds.validate_svm();
    int miss = 0;
    for (int i = 0; i < ds.train_count; ++i) {
      miss += classify(model, ds.patterns.row(i)) != ds.labels[i];
    }
    j["n"] = ds.train_count;
    j["errors"] = miss;
    j["error_rate"] = double(miss) / ds.train_count;
    j["radius_sq"] = radius_sq(ds.patterns, model.kernel);
    if (mj.contains("margin")) {
      j["margin"] = mj["margin"];
      j["h_margin"] =
          margin_to_h(mj["margin"].get<double>(), std::sqrt(j["radius_sq"].get<double>()),
                      ds.train_count);
    }
  } else if (a.action == "bound") {
    if (a.method == "trans") {
      if (a.n < 1 || a.errors < 0 || a.h < 1) {
        throw ValidationError("svm bound --method trans needs --n, --errors, --h");
      }
      j = report_to_json(
          svm_transductive_bound(a.n, a.k, double(a.errors) / a.n, a.h, a.epsilon));
    } else if (a.method == "margin") {
      if (a.model.empty() || a.data.empty()) {
        throw ValidationError("svm bound --method margin needs --model and --data");
      }
      std::ifstream in(a.model);
      if (!in) throw ValidationError("cannot open model " + a.model);
      const SvmModel model = model_from_json(json::parse(in));
      LabeledDataset ds = load_csv_file(a.data);
      ds.validate_svm();
      const double radius = std::sqrt(radius_sq(ds.patterns, model.kernel));
      const int h_max = a.h_max > 0 ? a.h_max : std::min(ds.train_count, 50);
      std::vector<int> y(ds.labels.begin(), ds.labels.begin() + ds.train_count);
      const auto counts = margin_violation_counts(
          model, ds.patterns.topRows(ds.train_count), y, radius, h_max);
      BoundReport rep = inductive_margin_bound(ds.train_count, a.k, counts, a.epsilon);
      j = report_to_json(rep);
      j["radius"] = radius;
      j["margin_counts"] = counts;
    } else {
      throw ValidationError("unknown svm bound method '" + a.method + "'");
    }
  } else {
    throw ValidationError("unknown svm action '" + a.action + "'");
  }
  emit(j, a.out);
  return 0;
}

struct SelectArgs {
  std::string data;
  std::string models;   // e.g. "1;2;1,2" (1-based feature ids per sub-model)
  std::string lambdas;  // e.g. "1,4,16"; empty = power-of-two grid
  double epsilon = 0.05;
  double zeta = 2.0;
  double cap = 1e8;
  std::string out;
};

std::vector<std::vector<int>> parse_models(const std::string& spec, int dims) {
  std::vector<std::vector<int>> models;
  std::stringstream groups(spec);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::vector<int> features;
    std::stringstream fields(group);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const int f = std::stoi(field);
      if (f < 1 || f > dims) throw ValidationError("model feature out of range: " + field);
      features.push_back(f - 1);
    }
    if (features.empty()) throw ValidationError("empty feature group in --models");
    models.push_back(std::move(features));
  }
  if (models.empty()) throw ValidationError("no models given");
  return models;
}

int run_select(const SelectArgs& a) {
  LabeledDataset ds = load_csv_file(a.data);
  const auto feature_sets = parse_models(a.models.empty() ? "1" : a.models, ds.dims());

  SelectionConfig cfg = SelectionConfig::defaults(ds.train_count, a.epsilon);
  cfg.zeta = a.zeta;
  if (!a.lambdas.empty()) {
    cfg.grid.clear();
    std::stringstream ss(a.lambdas);
    std::string field;
    while (std::getline(ss, field, ',')) cfg.grid.push_back(std::stod(field));
    cfg.nu.assign(cfg.grid.size(), 1.0 / cfg.grid.size());
  }

  std::vector<std::unique_ptr<CellGrid>> grids;
  std::vector<std::unique_ptr<LabeledDataset>> views;
  PosteriorSet set;
  for (const auto& features : feature_sets) {
    auto view = std::make_unique<LabeledDataset>();
    view->patterns.resize(ds.rows(), features.size());
    for (std::size_t c = 0; c < features.size(); ++c) {
      view->patterns.col(c) = ds.patterns.col(features[c]);
    }
    view->labels = ds.labels;
    view->train_count = ds.train_count;
    view->label_count = ds.label_count;
    grids.push_back(std::make_unique<CellGrid>(*view, false, a.cap));
    views.push_back(std::move(view));
    set.add_model(*grids.back());
  }

  std::vector<PosteriorSpec> posteriors;
  for (int m = 0; m < set.size(); ++m) {
    for (double lambda : cfg.grid) posteriors.push_back({m, lambda});
  }
  const SelectionResult res = select(set, posteriors, cfg);

  json j;
  json ordered = json::array();
  for (std::size_t i = 0; i < res.order.size(); ++i) {
    const PosteriorSpec& p = posteriors[res.order[i]];
    ordered.push_back({{"model", p.model},
                       {"lambda", p.lambda},
                       {"complexity", res.complexity[i]},
                       {"t", res.t_map[i]},
                       {"certificate_case", res.certificate_case[i]},
                       {"certificate_gap", res.certificate_gap[i]}});
  }
  j["posteriors"] = ordered;
  json bt = json::array();
  for (Eigen::Index i = 0; i < res.chained.rows(); ++i) {
    bt.push_back(std::vector<double>(res.chained.row(i).begin(), res.chained.row(i).end()));
  }
  j["chained_matrix"] = bt;
  j["k_hat"] = res.k_hat;
  j["t_hat"] = res.t_hat;
  j["selected"] = {{"model", posteriors[res.order[res.k_hat - 1]].model},
                   {"lambda", posteriors[res.order[res.k_hat - 1]].lambda}};
  emit(j, a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PAC-Bayes generalization bound calculators and exact Gibbs computations"};
  app.set_help_flag("--help", "print help");  // keep --h free for the VC dimension
  app.require_subcommand(1);

  BoundArgs ba;
  auto* bound = app.add_subcommand("bound", "evaluate one bound calculator");
  bound->add_option("--method", ba.method, "calculator name")->required();
  bound->add_option("--n", ba.n, "training sample size");
  bound->add_option("--k", ba.k, "shadow-to-training ratio");
  bound->add_option("--h", ba.h, "VC dimension / compression size");
  bound->add_option("--errors", ba.errors, "training error count");
  bound->add_option("--q", ba.q, "rate given directly");
  bound->add_option("--epsilon", ba.epsilon, "confidence parameter");
  bound->add_option("--kl", ba.kl, "complexity (nats)");
  bound->add_option("--lambda", ba.lambda, "inverse temperature");
  bound->add_option("--alpha", ba.alpha, "grid ratio or local alpha");
  bound->add_option("--beta", ba.beta, "local beta");
  bound->add_option("--gamma", ba.gamma, "local gamma");
  bound->add_option("--d", ba.d, "complexity before -log eps");
  bound->add_option("--r-min", ba.r_min, "minimal empirical rate");
  bound->add_option("--d-e", ba.d_e, "empirical dimension");
  bound->add_option("--d-eta", ba.d_eta, "margin dimension");
  bound->add_option("--eta", ba.eta, "margin");
  bound->add_option("--extra-kl", ba.extra_kl, "additional divergence term");
  bound->add_option("--out", ba.out, "write JSON here instead of stdout");

  std::string repro_only, repro_out;
  auto* repro = app.add_subcommand("reproduce", "recompute the numerical regression table");
  repro->add_option("--only", repro_only, "restrict to one row id");
  repro->add_option("--out", repro_out, "write the table here");

  ThresholdArgs ta;
  auto* thr = app.add_subcommand("threshold", "threshold-model computations");
  thr->add_option("action", ta.action, "fit | predict | dimension | bound")->required();
  thr->add_option("--data", ta.data, "training CSV")->required();
  thr->add_option("--shadow", ta.shadow, "shadow CSV (patterns only)");
  thr->add_option("--query", ta.query, "query CSV for predict");
  thr->add_flag("--transductive", ta.transductive, "use the uniform grid measure");
  thr->add_option("--lambda", ta.lambda, "inverse temperature");
  thr->add_option("--epsilon", ta.epsilon, "confidence parameter");
  thr->add_option("--alpha", ta.alpha, "grid ratio for the bound action");
  thr->add_option("--cap", ta.cap, "enumeration cost cap");
  thr->add_option("--out", ta.out, "write JSON here");

  SvmArgs sa;
  auto* svm = app.add_subcommand("svm", "support vector machine training and bounds");
  svm->add_option("action", sa.action, "train | eval | bound")->required();
  svm->add_option("--data", sa.data, "CSV with -1/+1 labels");
  svm->add_option("--model", sa.model, "model JSON path");
  svm->add_option("--kernel", sa.kernel, "kernel spec (linear, gaussian, exp, poly:c0,c1,...)");
  svm->add_option("--mode", sa.mode, "canonical | box");
  svm->add_option("--C", sa.c, "box parameter");
  svm->add_option("--tol", sa.tol, "KKT tolerance");
  svm->add_option("--epsilon", sa.epsilon, "confidence parameter");
  svm->add_option("--k", sa.k, "shadow-to-training ratio");
  svm->add_option("--h", sa.h, "margin class index");
  svm->add_option("--h-max", sa.h_max, "largest h scanned by the margin bound");
  svm->add_option("--n", sa.n, "sample size for direct bounds");
  svm->add_option("--errors", sa.errors, "error count for direct bounds");
  svm->add_option("--method", sa.method, "trans | margin");
  svm->add_option("--out", sa.out, "write JSON here");

  SelectArgs la;
  auto* sel = app.add_subcommand("select", "relative-bound posterior selection");
  sel->add_option("--data", la.data, "training CSV")->required();
  sel->add_option("--models", la.models, "feature groups, e.g. '1;2;1,2'");
  sel->add_option("--lambdas", la.lambdas, "temperature grid, e.g. '1,4,16'");
  sel->add_option("--epsilon", la.epsilon, "confidence parameter");
  sel->add_option("--zeta", la.zeta, "complexity ratio (> 1)");
  sel->add_option("--cap", la.cap, "enumeration cost cap");
  sel->add_option("--out", la.out, "write JSON here");

  SynthConfig sy;
  std::string synth_out;
  bool synth_svm = false;
  auto* synth = app.add_subcommand("synth", "generate a synthetic CSV dataset");
  synth->add_option("--n", sy.n, "training rows");
  synth->add_option("--h", sy.h, "measurements per row");
  synth->add_option("--labels", sy.label_count, "class count");
  synth->add_option("--shadow", sy.shadow, "unlabelled shadow rows");
  synth->add_option("--seed", sy.seed, "RNG seed")->required();
  synth->add_flag("--svm", synth_svm, "emit -1/+1 labels from a random halfspace");
  synth->add_option("--out", synth_out, "output CSV path");

  try {
    app.parse(argc, argv);
    if (bound->parsed()) return run_bound(ba);
    if (repro->parsed()) return run_reproduce(repro_only, repro_out);
    if (thr->parsed()) return run_threshold(ta);
    if (svm->parsed()) return run_svm(sa);
    if (sel->parsed()) return run_select(la);
    if (synth->parsed()) {
      sy.svm_labels = synth_svm;
      const LabeledDataset ds = make_synthetic(sy);
      if (synth_out.empty()) {
        save_csv(ds, std::cout);
      } else {
        std::ofstream out(synth_out);
        if (!out) throw ValidationError("cannot open " + synth_out);
        save_csv(ds, out);
      }
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cout << json{{"error", e.what()}}.dump() << "\n";
    return kExitValidation;
  } catch (const CapacityError& e) {
    std::cout << json{{"error", e.what()}}.dump() << "\n";
    return kExitCapacity;
  } catch (const NonSeparableError& e) {
    std::cout << json{{"error", e.what()}}.dump() << "\n";
    return kExitNonSeparable;
  } catch (const std::exception& e) {
    std::cout << json{{"error", e.what()}}.dump() << "\n";
    return kExitValidation;
  }
  return 0;
}
