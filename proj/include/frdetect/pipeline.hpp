#pragma once

// Training and evaluation orchestration: feature preparation for both
// splits, mini-batch Adam training with optional early stopping, metrics,
// the cold-start perturbation, publisher statistics and run directories.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "frdetect/adam.hpp"
#include "frdetect/checkpoint.hpp"
#include "frdetect/config.hpp"
#include "frdetect/corpus.hpp"
#include "frdetect/fusion.hpp"
#include "frdetect/metrics.hpp"
#include "frdetect/social.hpp"

namespace frdetect {

// ---------------------------------------------------------------------------
// Seeds: one independent stream per purpose.
// ---------------------------------------------------------------------------

enum class RngPurpose : std::uint64_t {
  Init = 1,
  Dropout = 2,
  Sampling = 3,
  Perturbation = 4,
  OutOfVocabulary = 5,
};

inline std::uint64_t stream_seed(std::uint64_t seed, RngPurpose purpose) {
  return detail::splitmix64(seed * 0x9e3779b97f4a7c15ULL +
                            static_cast<std::uint64_t>(purpose));
}

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

struct ArticleFeatures {
  std::vector<NewsArticle> articles;
  std::vector<Tensor> tensors;
  std::vector<CreditVector> raw_credit;
  std::vector<CreditVector> credit;  // normalized
  std::vector<InfluenceVector> raw_influence;
  std::vector<InfluenceVector> influence;  // normalized

  std::size_t size() const { return articles.size(); }
};

struct PreparedData {
  Thresholds thresholds;
  std::size_t embedding_dim = 0;
  CreditLedger ledger;
  InfluenceTable influence_table;
  MinMaxScaler credit_scaler;
  MinMaxScaler influence_scaler;
  ArticleFeatures train;
  ArticleFeatures test;
};

/// Builds tensors and normalized publisher features for both splits.
/// Thresholds, credit tallies and scaler bounds come from the training split
/// only. `t_d_override` of 0 derives t_d from the training bodies.
inline PreparedData prepare_data(std::vector<NewsArticle> train,
                                 std::vector<NewsArticle> test,
                                 const EmbeddingTable& embeddings,
                                 InfluenceTable influence, std::size_t t_s,
                                 std::size_t t_d_override = 0) {
  if (train.empty()) throw Error("empty corpus");
  PreparedData d;
  d.embedding_dim = embeddings.dimension();
  d.influence_table = std::move(influence);

  std::vector<TokenizedArticle> train_tok, test_tok;
  for (const auto& a : train) train_tok.push_back(split_article(a));
  for (const auto& a : test) test_tok.push_back(split_article(a));
  d.thresholds = compute_thresholds(train_tok, t_s);
  if (t_d_override != 0) d.thresholds.t_d = t_d_override;

  d.ledger = tally_credit(train);

  auto fill = [&](ArticleFeatures& f, std::vector<NewsArticle>& arts,
                  const std::vector<TokenizedArticle>& tok) {
    f.articles = std::move(arts);
    for (std::size_t i = 0; i < f.articles.size(); ++i) {
      f.tensors.push_back(build_tensor(tok[i], d.thresholds, embeddings));
      f.raw_credit.push_back(raw_credit(f.articles[i], d.ledger));
      f.raw_influence.push_back(raw_influence(f.articles[i], d.influence_table));
    }
  };
  fill(d.train, train, train_tok);
  fill(d.test, test, test_tok);

  std::vector<std::vector<double>> credit_rows, influence_rows;
  for (const auto& c : d.train.raw_credit) credit_rows.push_back(c.values());
  for (const auto& i : d.train.raw_influence) influence_rows.push_back(i.values());
  d.credit_scaler = MinMaxScaler::fit(credit_rows);
  d.influence_scaler = MinMaxScaler::fit(influence_rows);

  for (ArticleFeatures* f : {&d.train, &d.test}) {
    for (std::size_t i = 0; i < f->size(); ++i) {
      f->credit.push_back(normalize(f->raw_credit[i], d.credit_scaler));
      f->influence.push_back(normalize(f->raw_influence[i], d.influence_scaler));
    }
  }
  return d;
}

/// Influence source named by the configuration. Follower-count mode prefers
/// the publishers table and falls back to the edge list.
inline InfluenceTable load_influence(const RunConfig& c,
                                     std::span<const NewsArticle> train,
                                     std::span<const NewsArticle> test) {
  if (c.influence_mode == InfluenceMode::FollowerCount && !c.publishers_path.empty()) {
    return InfluenceTable::from_counts(load_follower_counts(c.publishers_path));
  }
  if (c.edges_path.empty()) {
    if (c.influence_mode == InfluenceMode::Exact)
      throw Error("influence.mode = exact needs data.edges");
    return {};
  }
  FollowerGraph g = FollowerGraph::load_edge_list(c.edges_path);
  g.set_total_users(c.total_users);
  g.set_max_depth(c.max_depth);
  if (c.share_probability) g.set_share_probability(*c.share_probability);
  std::vector<std::string> users;
  for (auto span : {train, test})
    for (const auto& a : span)
      users.insert(users.end(), a.publisher_ids.begin(), a.publisher_ids.end());
  return InfluenceTable::from_graph(g, c.influence_mode, users);
}

inline PreparedData prepare_data(const RunConfig& c) {
  validate(c);
  if (c.train_path.empty()) throw Error("no training corpus given (data.train)");
  if (c.embeddings_path.empty()) throw Error("no embeddings given (data.embeddings)");
  auto train = load_corpus(c.train_path);
  auto test = c.test_path.empty() ? std::vector<NewsArticle>{} : load_corpus(c.test_path);
  const auto embeddings =
      EmbeddingTable::load(c.embeddings_path, stream_seed(c.seed, RngPurpose::OutOfVocabulary));
  auto influence = load_influence(c, train, test);
  return prepare_data(std::move(train), std::move(test), embeddings, std::move(influence),
                      c.t_s, c.t_d);
}

// ---------------------------------------------------------------------------
// Cold start
// ---------------------------------------------------------------------------

/// Zeroes NCT and NCF (numP untouched) on exactly round(fraction * n)
/// articles chosen uniformly. Returns the ids of the affected articles in
/// corpus order.
inline std::vector<std::string> cold_start_perturb(std::span<const NewsArticle> articles,
                                                   std::span<CreditVector> credit,
                                                   double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw Error("perturbation fraction must lie in [0, 1]");
  if (articles.size() != credit.size())
    throw Error("article and credit counts differ");
  const std::size_t n = articles.size();
  const auto count =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(count);
  std::sort(order.begin(), order.end());
  std::vector<std::string> affected;
  for (std::size_t i : order) {
    credit[i].nct = 0.0;
    credit[i].ncf = 0.0;
    affected.push_back(articles[i].id);
  }
  return affected;
}

/// Perturbs both splits; the test split draws from its own derived stream.
inline void apply_cold_start(PreparedData& d, double fraction, std::uint64_t seed) {
  const std::uint64_t s = stream_seed(seed, RngPurpose::Perturbation);
  cold_start_perturb(d.train.articles, d.train.credit, fraction, s);
  cold_start_perturb(d.test.articles, d.test.credit, fraction, detail::splitmix64(s));
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct Example {
  const Tensor* tensor = nullptr;
  std::vector<double> explicit_values;
  Label label = Label::Real;
};

inline std::vector<Example> make_examples(const ArticleFeatures& f, Variant v) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    out.push_back(Example{&f.tensors[i],
                          explicit_features(v, f.credit[i], f.influence[i]),
                          f.articles[i].label});
  }
  return out;
}

struct TrainOptions {
  AdamOptions adam;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  bool early_stopping = true;
  double validation_fraction = 0.1;
  std::size_t patience = 10;
  std::uint64_t seed = 1;

  static TrainOptions from(const RunConfig& c) {
    return TrainOptions{c.adam,          c.epochs,   c.batch_size, c.early_stopping,
                        c.validation_fraction, c.patience, c.seed};
  }
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;            // mean train-mode loss over the epoch
  double train_accuracy = 0.0;  // eval-mode accuracy on the fitting set
  std::optional<double> validation_loss;
  std::optional<double> validation_accuracy;
};

struct TrainResult {
  FrDetectModel model;
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
  std::size_t validation_size = 0;
};

/// Returning false stops training after the reported epoch.
using EpochCallback = std::function<bool(const EpochRecord&)>;

struct LossAndAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
};

inline LossAndAccuracy measure(const FrDetectModel& model, std::span<const Example> data,
                               std::span<const std::size_t> indices) {
  LossAndAccuracy r;
  if (indices.empty()) return r;
  std::mt19937_64 unused(0);
  std::size_t correct = 0;
  for (std::size_t i : indices) {
    const Example& ex = data[i];
    const auto l = model.logits(*ex.tensor, ex.explicit_values, Mode::Eval, unused);
    const auto sm = softmax_xent(l, static_cast<std::size_t>(ex.label));
    r.loss += sm.loss;
    if (decide(sm.probabilities) == ex.label) ++correct;
  }
  r.loss /= static_cast<double>(indices.size());
  r.accuracy = static_cast<double>(correct) / static_cast<double>(indices.size());
  return r;
}

inline FrDetectModel initial_model(const ModelShape& shape, std::uint64_t seed) {
  FrDetectModel model(shape);
  std::mt19937_64 init_rng(stream_seed(seed, RngPurpose::Init));
  model.initialize(init_rng);
  return model;
}

inline TrainResult train_model(const ModelShape& shape, std::span<const Example> data,
                               const TrainOptions& opt, const EpochCallback& on_epoch = {}) {
  if (data.empty()) throw Error("empty corpus");
  TrainResult result;
  result.model = initial_model(shape, opt.seed);
  FrDetectModel& model = result.model;

  std::mt19937_64 sampling(stream_seed(opt.seed, RngPurpose::Sampling));
  std::mt19937_64 dropout_rng(stream_seed(opt.seed, RngPurpose::Dropout));

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> validation;
  if (opt.early_stopping && opt.validation_fraction > 0.0 && data.size() >= 2) {
    std::shuffle(order.begin(), order.end(), sampling);
    auto n_val = static_cast<std::size_t>(
        std::llround(opt.validation_fraction * static_cast<double>(data.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, data.size() - 1);
    validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    order.erase(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::sort(validation.begin(), validation.end());
    std::sort(order.begin(), order.end());
  }
  result.validation_size = validation.size();
  const std::vector<std::size_t> fitting = order;

  AdamState adam{opt.adam, {}, {}, 0};
  FrDetectModel grads = model.zeros_like();
  std::vector<Tensor*> params = model.parameters();
  std::vector<Tensor*> grad_ptrs = grads.parameters();
  std::vector<const Tensor*> grad_cptrs(grad_ptrs.begin(), grad_ptrs.end());

  double best_val = std::numeric_limits<double>::infinity();
  FrDetectModel best_model = model;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), sampling);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t end = std::min(order.size(), start + opt.batch_size);
      for (Tensor* g : grad_ptrs) g->fill(0.0);
      for (std::size_t b = start; b < end; ++b) {
        const Example& ex = data[order[b]];
        loss_sum += model.accumulate_gradient(*ex.tensor, ex.explicit_values, ex.label,
                                              Mode::Train, dropout_rng, grads);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (Tensor* g : grad_ptrs)
        for (double& v : g->raw()) v *= scale;
      adam_step(params, grad_cptrs, adam);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(order.size());
    rec.train_accuracy = measure(model, data, fitting).accuracy;
    if (!validation.empty()) {
      const auto v = measure(model, data, validation);
      rec.validation_loss = v.loss;
      rec.validation_accuracy = v.accuracy;
    }
    result.log.push_back(rec);

    bool stop = on_epoch && !on_epoch(rec);
    if (!validation.empty()) {
      if (*rec.validation_loss < best_val) {
        best_val = *rec.validation_loss;
        best_model = model;
        result.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= opt.patience) {
        result.stopped_early = true;
        stop = true;
      }
    } else {
      result.best_epoch = epoch;
    }
    if (stop) break;
  }
  if (!validation.empty() && result.best_epoch > 0) result.model = std::move(best_model);
  return result;
}

/// Predictions are computed in parallel and tallied in input order.
inline EvalReport evaluate_model(const FrDetectModel& model, std::span<const Example> data,
                                 std::size_t threads = 0) {
  if (data.empty()) throw Error("cannot evaluate an empty test set");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, data.size());
  std::vector<Label> predicted(data.size());
  auto work = [&](std::size_t first) {
    for (std::size_t i = first; i < data.size(); i += threads)
      predicted[i] = model.predict(*data[i].tensor, data[i].explicit_values).label;
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& t : pool) t.join();
  ConfusionMatrix m;
  for (std::size_t i = 0; i < data.size(); ++i) m.add(data[i].label, predicted[i]);
  return make_report(m);
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

inline ModelShape model_shape(const RunConfig& c, const PreparedData& d, Variant v) {
  ModelShape s;
  s.variant = v;
  s.t_s = d.thresholds.t_s;
  s.t_d = d.thresholds.t_d;
  s.embedding_dim = d.embedding_dim;
  s.filters = c.filters;
  s.dense_width = c.dense_width;
  s.dropout = c.dropout;
  return s;
}

struct ExperimentResult {
  Variant variant = Variant::Full;
  double fraction = 0.0;
  TrainResult training;
  EvalReport report;
};

inline ExperimentResult run_variant(const PreparedData& d, const RunConfig& c, Variant v) {
  const auto train = make_examples(d.train, v);
  const auto test = make_examples(d.test, v);
  ExperimentResult r;
  r.variant = v;
  r.training = train_model(model_shape(c, d, v), train, TrainOptions::from(c));
  r.report = evaluate_model(r.training.model, test);
  return r;
}

/// All four variants on the same prepared tensors.
inline std::vector<ExperimentResult> run_ablation(const PreparedData& d, const RunConfig& c) {
  std::vector<ExperimentResult> out;
  for (Variant v : kAllVariants) out.push_back(run_variant(d, c, v));
  return out;
}

/// Retrains `c.variant` once per fraction with NCT/NCF zeroed on that share
/// of both the training and the test articles.
inline std::vector<ExperimentResult> run_cold_start(const PreparedData& d, const RunConfig& c,
                                                    std::span<const double> fractions) {
  std::vector<ExperimentResult> out;
  for (double f : fractions) {
    PreparedData p = d;
    apply_cold_start(p, f, c.seed);
    ExperimentResult r = run_variant(p, c, c.variant);
    r.fraction = f;
    out.push_back(std::move(r));
  }
  return out;
}

inline constexpr double kColdStartFractions[] = {0.0, 0.1, 0.2, 0.3};

// ---------------------------------------------------------------------------
// Publisher statistics
// ---------------------------------------------------------------------------

inline constexpr const char* kStatFeatures[] = {"NCT", "NCF", "NCF/NCT", "NI", "numP"};

struct PublisherStats {
  // Indexed [label][feature] in kStatFeatures order, on raw values.
  double mean[2][5] = {};
  std::size_t count[2] = {};
};

inline PublisherStats export_stats(std::span<const NewsArticle> corpus,
                                   const CreditLedger& ledger,
                                   const InfluenceTable& influence) {
  PublisherStats s;
  for (const auto& a : corpus) {
    const auto c = raw_credit(a, ledger);
    const auto i = raw_influence(a, influence);
    const std::size_t l = static_cast<std::size_t>(a.label);
    const double ratio = c.nct == 0.0 ? 0.0 : c.ncf / c.nct;
    const double row[5] = {c.nct, c.ncf, ratio, i.ni, c.num_p};
    for (int f = 0; f < 5; ++f) s.mean[l][f] += row[f];
    ++s.count[l];
  }
  for (int l = 0; l < 2; ++l)
    if (s.count[l])
      for (int f = 0; f < 5; ++f) s.mean[l][f] /= static_cast<double>(s.count[l]);
  return s;
}

inline std::string stats_tsv(const PublisherStats& s) {
  std::ostringstream os;
  os << "class\tfeature\tmean\tarticles\n";
  os << std::setprecision(10);
  for (int l = 0; l < 2; ++l)
    for (int f = 0; f < 5; ++f)
      os << to_string(static_cast<Label>(l)) << '\t' << kStatFeatures[f] << '\t'
         << s.mean[l][f] << '\t' << s.count[l] << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

inline Checkpoint make_checkpoint(const FrDetectModel& model, const RunConfig& c) {
  Checkpoint ck;
  const ModelShape& s = model.shape();
  ck.metadata["model.variant"] = to_string(s.variant);
  ck.metadata["shape.t_s"] = std::to_string(s.t_s);
  ck.metadata["shape.t_d"] = std::to_string(s.t_d);
  ck.metadata["shape.embedding_dim"] = std::to_string(s.embedding_dim);
  ck.metadata["shape.filters"] = std::to_string(s.filters);
  ck.metadata["shape.dense_width"] = std::to_string(s.dense_width);
  ck.metadata["shape.dropout"] = detail::format_double(s.dropout);
  ck.metadata["seed"] = std::to_string(c.seed);
  for (auto p : {RngPurpose::Init, RngPurpose::Dropout, RngPurpose::Sampling,
                 RngPurpose::Perturbation, RngPurpose::OutOfVocabulary}) {
    ck.metadata["seed.stream" + std::to_string(static_cast<std::uint64_t>(p))] =
        std::to_string(stream_seed(c.seed, p));
  }
  const auto names = model.parameter_names();
  const auto params = model.parameters();
  for (std::size_t i = 0; i < names.size(); ++i) ck.tensors.emplace_back(names[i], *params[i]);
  return ck;
}

inline FrDetectModel model_from_checkpoint(const Checkpoint& ck) {
  ModelShape s;
  auto num = [&](const char* key) {
    return static_cast<std::size_t>(detail::parse_uint(key, ck.meta(key)));
  };
  s.variant = parse_variant(ck.meta("model.variant"));
  s.t_s = num("shape.t_s");
  s.t_d = num("shape.t_d");
  s.embedding_dim = num("shape.embedding_dim");
  s.filters = num("shape.filters");
  s.dense_width = num("shape.dense_width");
  s.dropout = detail::parse_double("shape.dropout", ck.meta("shape.dropout"));
  FrDetectModel model(s);
  const auto names = model.parameter_names();
  const auto params = model.parameters();
  if (ck.tensors.size() != names.size()) {
    throw Error("checkpoint holds " + std::to_string(ck.tensors.size()) +
                " tensors, model expects " + std::to_string(names.size()));
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Tensor& t = ck.tensor(names[i]);
    if (t.shape() != params[i]->shape()) {
      throw Error("checkpoint tensor " + names[i] + " has shape " + shape_string(t.shape()) +
                  ", model expects " + shape_string(params[i]->shape()));
    }
    *params[i] = t;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace detail

inline std::string train_log_text(const TrainResult& r) {
  std::ostringstream os;
  os << "epoch\tloss\ttrain_accuracy\tvalidation_loss\tvalidation_accuracy\n";
  for (const auto& e : r.log) {
    os << e.epoch << '\t' << detail::format_double(e.loss) << '\t'
       << detail::format_double(e.train_accuracy) << '\t'
       << (e.validation_loss ? detail::format_double(*e.validation_loss) : "-") << '\t'
       << (e.validation_accuracy ? detail::format_double(*e.validation_accuracy) : "-")
       << '\n';
  }
  os << "# best_epoch " << r.best_epoch << (r.stopped_early ? " (early stop)" : "") << '\n';
  return os.str();
}

inline std::string report_tsv(const EvalReport& r, const RunConfig& c) {
  std::ostringstream os;
  os << "key\tvalue\n";
  os << "accuracy\t" << detail::fixed(r.accuracy) << '\n';
  os << "precision\t" << detail::fixed(r.precision) << '\n';
  os << "recall\t" << detail::fixed(r.recall) << '\n';
  os << "f1\t" << detail::fixed(r.f1) << '\n';
  os << "tp\t" << r.counts.tp << '\n';
  os << "fp\t" << r.counts.fp << '\n';
  os << "tn\t" << r.counts.tn << '\n';
  os << "fn\t" << r.counts.fn << '\n';
  os << "precision_undefined\t" << (r.precision_undefined ? 1 : 0) << '\n';
  std::istringstream cfg(serialize_config(c, {"run.dir"}));
  std::string line;
  while (std::getline(cfg, line)) {
    const auto eq = line.find(" = ");
    os << "config." << line.substr(0, eq) << '\t' << line.substr(eq + 3) << '\n';
  }
  return os.str();
}

inline std::string report_text(const EvalReport& r, const std::string& title) {
  std::ostringstream os;
  os << title << '\n';
  os << "  accuracy  " << detail::fixed(r.accuracy, 3) << '\n';
  os << "  precision " << detail::fixed(r.precision, 3)
     << (r.precision_undefined ? "  (undefined: no fake predictions)" : "") << '\n';
  os << "  recall    " << detail::fixed(r.recall, 3) << '\n';
  os << "  f1        " << detail::fixed(r.f1, 3) << '\n';
  os << "  confusion (fake = positive): TP " << r.counts.tp << "  FP " << r.counts.fp
     << "  TN " << r.counts.tn << "  FN " << r.counts.fn << '\n';
  return os.str();
}

inline std::string experiments_tsv(std::span<const ExperimentResult> rs) {
  std::ostringstream os;
  os << "variant\tfraction\taccuracy\tprecision\trecall\tf1\ttp\tfp\ttn\tfn\tepochs\n";
  for (const auto& r : rs) {
    os << to_string(r.variant) << '\t' << detail::fixed(r.fraction, 2) << '\t'
       << detail::fixed(r.report.accuracy) << '\t' << detail::fixed(r.report.precision)
       << '\t' << detail::fixed(r.report.recall) << '\t' << detail::fixed(r.report.f1)
       << '\t' << r.report.counts.tp << '\t' << r.report.counts.fp << '\t'
       << r.report.counts.tn << '\t' << r.report.counts.fn << '\t' << r.training.log.size()
       << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Run-directory commands (shared by the CLI and the acceptance suite)
// ---------------------------------------------------------------------------

/// Resolves t_d, trains `c.variant` (with coldstart.fraction applied), and
/// writes config.snapshot, train.log and checkpoint.bin into c.run_dir.
inline TrainResult command_train(RunConfig c) {
  PreparedData d = prepare_data(c);
  if (c.perturb_fraction > 0.0) apply_cold_start(d, c.perturb_fraction, c.seed);
  c.t_d = d.thresholds.t_d;
  std::filesystem::create_directories(c.run_dir);
  const std::filesystem::path dir(c.run_dir);
  detail::write_text(dir / "config.snapshot", serialize_config(c));
  const auto train = make_examples(d.train, c.variant);
  TrainResult r = train_model(model_shape(c, d, c.variant), train, TrainOptions::from(c));
  detail::write_text(dir / "train.log", train_log_text(r));
  save_checkpoint((dir / "checkpoint.bin").string(), make_checkpoint(r.model, c));
  return r;
}

/// Evaluates c.run_dir/checkpoint.bin on the test split and writes
/// report.txt and report.tsv.
inline EvalReport command_eval(const RunConfig& c) {
  const std::filesystem::path dir(c.run_dir);
  const FrDetectModel model =
      model_from_checkpoint(load_checkpoint((dir / "checkpoint.bin").string()));
  PreparedData d = prepare_data(c);
  if (c.perturb_fraction > 0.0) apply_cold_start(d, c.perturb_fraction, c.seed);
  const ModelShape expected = model_shape(c, d, model.shape().variant);
  if (!(expected == model.shape())) {
    throw Error("checkpoint shape does not match the data and configuration");
  }
  const auto test = make_examples(d.test, model.shape().variant);
  const EvalReport r = evaluate_model(model, test);
  detail::write_text(dir / "report.txt",
                     report_text(r, "FR-Detect (" + to_string(model.shape().variant) +
                                        ") on " + c.test_path));
  detail::write_text(dir / "report.tsv", report_tsv(r, c));
  return r;
}

}  // namespace frdetect
