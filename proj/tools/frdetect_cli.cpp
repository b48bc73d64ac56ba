// frdetect command-line interface.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "frdetect/frdetect.hpp"

using namespace frdetect;

namespace {

// Flags shared by the run subcommands. Each maps onto a config key and, when
// given, overrides the config file.
struct RunFlags {
  std::string config_path;
  std::optional<std::string> train, test, embeddings, publishers, edges, variant, run_dir;
  std::optional<std::size_t> t_s, t_d, epochs;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "Config file (key = value)");
    app->add_option("--train", train, "Training corpus (JSON Lines)");
    app->add_option("--test", test, "Test corpus (JSON Lines)");
    app->add_option("--embeddings", embeddings, "Word vectors, one word per line");
    app->add_option("--publishers", publishers, "Follower counts, user_id<TAB>count");
    app->add_option("--edges", edges, "Follower graph, 'follower followed' per line");
    app->add_option("--t-s", t_s, "Words per sentence");
    app->add_option("--t-d", t_d, "Sentences per article (0 derives from training data)");
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--variant", variant, "slcnn, slcnn_c, slcnn_i or full");
    app->add_option("--epochs", epochs, "Maximum training epochs");
    app->add_option("--run-dir", run_dir, "Output directory");
    app->add_option("--set", sets, "Override any config key: --set key=value")
        ->allow_extra_args(false);
  }

  RunConfig resolve(RunConfig base = {}) const {
    RunConfig c = config_path.empty() ? std::move(base) : load_config(config_path, std::move(base));
    auto put = [&](const char* key, const auto& v) {
      if (!v) return;
      if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>)
        set_config_value(c, key, *v);
      else
        set_config_value(c, key, std::to_string(*v));
    };
    put("data.train", train);
    put("data.test", test);
    put("data.embeddings", embeddings);
    put("data.publishers", publishers);
    put("data.edges", edges);
    put("thresholds.t_s", t_s);
    put("thresholds.t_d", t_d);
    put("seed", seed);
    put("model.variant", variant);
    put("train.epochs", epochs);
    put("run.dir", run_dir);
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
      set_config_value(c, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    validate(c);
    return c;
  }
};

void print_epochs(const TrainResult& r) {
  for (const auto& e : r.log) {
    std::cout << "epoch " << e.epoch << "  loss " << detail::fixed(e.loss, 4) << "  train acc "
              << detail::fixed(e.train_accuracy, 3);
    if (e.validation_accuracy)
      std::cout << "  val loss " << detail::fixed(*e.validation_loss, 4) << "  val acc "
                << detail::fixed(*e.validation_accuracy, 3);
    std::cout << '\n';
  }
  std::cout << "best epoch " << r.best_epoch << (r.stopped_early ? " (stopped early)" : "")
            << '\n';
}

// Writes config.snapshot, report.txt and report.tsv for a multi-run experiment.
void write_experiment(const RunConfig& c, const std::vector<ExperimentResult>& rs,
                      const std::string& title) {
  const std::filesystem::path dir(c.run_dir);
  std::filesystem::create_directories(dir);
  detail::write_text(dir / "config.snapshot", serialize_config(c));
  std::string text = title + "\n\n";
  for (const auto& r : rs) {
    std::string name = to_string(r.variant);
    if (title.rfind("cold", 0) == 0) name += ", fraction " + detail::fixed(r.fraction, 2);
    text += report_text(r.report, name) + '\n';
  }
  detail::write_text(dir / "report.txt", text);
  std::string tsv = experiments_tsv(rs);
  std::istringstream cfg(serialize_config(c, {"run.dir"}));
  std::string line;
  while (std::getline(cfg, line)) tsv += "# " + line + '\n';
  detail::write_text(dir / "report.tsv", tsv);
  std::cout << text;
}

// Resolves t_d once so every run in an experiment shares the same tensors.
RunConfig with_resolved_td(RunConfig c, const PreparedData& d) {
  c.t_d = d.thresholds.t_d;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fake news detection from article text and publisher features"};
  app.require_subcommand(1);

  RunFlags train_flags, eval_flags, ablate_flags, cold_flags, stats_flags;

  auto* train = app.add_subcommand("train", "Train one variant and write a checkpoint");
  train_flags.attach(train);

  auto* eval = app.add_subcommand("eval", "Evaluate a trained run directory on the test split");
  eval_flags.attach(eval);

  auto* ablate = app.add_subcommand("ablate", "Train and evaluate all four variants");
  ablate_flags.attach(ablate);

  auto* cold = app.add_subcommand("coldstart", "Retrain with NCT/NCF zeroed on a share of articles");
  cold_flags.attach(cold);
  std::vector<double> fractions(std::begin(kColdStartFractions), std::end(kColdStartFractions));
  cold->add_option("--fractions", fractions, "Perturbation fractions")->delimiter(',');

  auto* stats = app.add_subcommand("stats", "Per-class means of the raw publisher features");
  stats_flags.attach(stats);
  std::string stats_out;
  stats->add_option("-o,--out", stats_out, "Write the table here instead of stdout");

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus with controllable signal");
  SyntheticSpec spec;
  std::string synth_dir;
  std::uint64_t synth_seed = 1;
  synth->add_option("-o,--out", synth_dir, "Output directory")->required();
  synth->add_option("--real", spec.real_count, "Real articles");
  synth->add_option("--fake", spec.fake_count, "Fake articles");
  synth->add_option("--test-fraction", spec.test_fraction, "Share held out as the test split");
  synth->add_option("--vocab", spec.vocab_size, "Vocabulary size");
  synth->add_option("--dim", spec.embedding_dim, "Embedding dimension");
  synth->add_option("--text-signal", spec.text_signal, "Label signal in the words, 0..1");
  synth->add_option("--publisher-signal", spec.publisher_signal,
                    "Label signal in publisher histories, 0..1");
  synth->add_option("--publishers", spec.publishers, "Number of publishers");
  synth->add_option("--audience", spec.audience, "Number of non-publishing followers");
  synth->add_option("--seed", synth_seed, "Generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const RunConfig c = train_flags.resolve();
      const TrainResult r = command_train(c);
      print_epochs(r);
      std::cout << "wrote " << c.run_dir << "/checkpoint.bin\n";
    } else if (*eval) {
      // The run's snapshot is the base; flags and --config override it.
      RunConfig probe = eval_flags.resolve();
      const auto snapshot = std::filesystem::path(probe.run_dir) / "config.snapshot";
      RunConfig base = load_config(snapshot.string());
      base.run_dir = probe.run_dir;
      const RunConfig c = eval_flags.resolve(base);
      const EvalReport r = command_eval(c);
      std::cout << report_text(r, "FR-Detect (" + to_string(c.variant) + ")");
    } else if (*ablate) {
      RunConfig c = ablate_flags.resolve();
      PreparedData d = prepare_data(c);
      if (c.perturb_fraction > 0.0) apply_cold_start(d, c.perturb_fraction, c.seed);
      c = with_resolved_td(c, d);
      write_experiment(c, run_ablation(d, c), "ablation");
    } else if (*cold) {
      RunConfig c = cold_flags.resolve();
      for (double f : fractions)
        if (!(f >= 0.0 && f <= 1.0)) throw Error("fractions must lie in [0, 1]");
      const PreparedData d = prepare_data(c);
      c = with_resolved_td(c, d);
      write_experiment(c, run_cold_start(d, c, fractions), "cold start, " + to_string(c.variant));
    } else if (*stats) {
      const RunConfig c = stats_flags.resolve();
      const PreparedData d = prepare_data(c);
      std::vector<NewsArticle> all = d.train.articles;
      all.insert(all.end(), d.test.articles.begin(), d.test.articles.end());
      const std::string table = stats_tsv(export_stats(all, d.ledger, d.influence_table));
      if (stats_out.empty()) {
        std::cout << table;
      } else {
        detail::write_text(stats_out, table);
      }
    } else if (*synth) {
      std::filesystem::create_directories(synth_dir);
      const SyntheticCorpus corpus = gen_synthetic(spec, synth_seed);
      const SyntheticPaths p = write_synthetic(corpus, synth_dir);
      RunConfig c;
      c.train_path = p.train;
      c.test_path = p.test;
      c.embeddings_path = p.embeddings;
      c.publishers_path = p.publishers;
      c.edges_path = p.edges;
      c.run_dir = synth_dir + "/run";
      detail::write_text(std::filesystem::path(synth_dir) / "run.cfg", serialize_config(c));
      std::cout << "wrote " << corpus.train.size() << " training and " << corpus.test.size()
                << " test articles to " << synth_dir << " (config: " << synth_dir
                << "/run.cfg)\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
