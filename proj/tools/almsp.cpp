#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "almsp/engine.hpp"
#include "almsp/error.hpp"
#include "almsp/service.hpp"
#include "almsp/synthetic.hpp"

using namespace almsp;

namespace {

AnnotationService* g_service = nullptr;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning for multilingual semantic parsing data collection"};
  app.require_subcommand(1);

  // validate
  std::string v_corpus, v_src = "en", v_tgt = "de";
  auto* validate = app.add_subcommand("validate", "Check a corpus file and print a summary");
  validate->add_option("corpus", v_corpus, "JSONL corpus")->required();
  validate->add_option("--source-lang", v_src);
  validate->add_option("--target-lang", v_tgt);

  // select
  std::string s_config, s_corpus, s_strategy, s_selected, s_out;
  std::size_t s_budget = 0;
  std::optional<double> s_alpha, s_beta;
  std::optional<std::uint64_t> s_seed;
  auto* select = app.add_subcommand("select", "Pick the next batch of examples to translate");
  select->add_option("--config", s_config, "campaign config file");
  select->add_option("--corpus", s_corpus, "corpus (overrides the config)");
  select->add_option("--strategy", s_strategy)->required();
  select->add_option("--budget", s_budget, "batch size K")->required()->check(CLI::PositiveNumber);
  select->add_option("--alpha", s_alpha);
  select->add_option("--beta", s_beta);
  select->add_option("--seed", s_seed);
  select->add_option("--selected", s_selected, "ids already translated, one per line");
  select->add_option("--out", s_out, "write ids here instead of stdout");

  // simulate
  std::string m_config, m_out, m_strategy;
  std::optional<std::uint64_t> m_seed;
  auto* simulate = app.add_subcommand("simulate", "Run a gold-reveal campaign and print per-round metrics");
  simulate->add_option("--config", m_config)->required();
  simulate->add_option("--out", m_out, "metrics file (default stdout)");
  simulate->add_option("--strategy", m_strategy, "override the configured strategy");
  simulate->add_option("--seed", m_seed, "override the configured seed");

  // tune
  std::string t_grid, t_config, t_corpus;
  auto* tune = app.add_subcommand("tune", "Grid-search alpha and beta on source-language data only");
  tune->add_option("--grid", t_grid, "grid file (alphas, betas, tuning_rate)");
  tune->add_option("--config", t_config);
  tune->add_option("--corpus", t_corpus, "corpus (overrides the config)");

  // serve
  std::string h_host = "127.0.0.1", h_journal;
  int h_port = 8080;
  bool h_show_lf = false;
  auto* serve = app.add_subcommand("serve", "Serve human translation sessions over HTTP");
  serve->add_option("--port", h_port);
  serve->add_option("--host", h_host);
  serve->add_option("--journal", h_journal, "session journal directory");
  serve->add_flag("--show-lf", h_show_lf, "show gold LFs to translators");

  // synth
  std::string y_out, y_lexicon;
  auto* synth = app.add_subcommand("synth", "Write the synthetic bilingual corpus");
  synth->add_option("--out", y_out, "corpus file")->required();
  synth->add_option("--lexicon", y_lexicon, "also write the token lexicon (TSV)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const Corpus c = load_corpus(v_corpus, CorpusFormat::Jsonl, v_src, v_tgt);
      std::size_t with_target = 0;
      std::set<std::string> lfs;
      for (const auto& ex : c.examples) {
        with_target += ex.has_utterance(v_tgt);
        lfs.insert(ex.lf);
      }
      std::cout << "examples: " << c.size() << "\n"
                << "distinct LFs: " << lfs.size() << "\n"
                << "with " << v_tgt << " utterance: " << with_target << "\n"
                << "compound types: " << covered_units(c.examples, UnitKind::Compounds).size() << "\n"
                << "atom types: " << covered_units(c.examples, UnitKind::Atoms).size() << "\n";
      return 0;
    }

    if (*select) {
      CampaignConfig cfg = s_config.empty() ? CampaignConfig{} : load_config(s_config);
      if (!s_corpus.empty()) cfg.corpus_path = s_corpus;
      cfg.acquisition.strategy = parse_strategy(s_strategy);
      if (is_amsp(cfg.acquisition.strategy)) cfg.mode = CampaignMode::Amsp;
      if (s_alpha) cfg.acquisition.alpha = *s_alpha;
      if (s_beta) cfg.acquisition.beta = *s_beta;
      if (s_seed) cfg.seed = cfg.acquisition.seed = *s_seed;
      cfg.validate();
      if (cfg.corpus_path.empty()) throw ConfigError("select needs --corpus or a config with 'corpus'");
      const Corpus c = load_corpus(cfg.corpus_path, CorpusFormat::Jsonl, cfg.source_lang, cfg.target_lang);
      std::vector<std::string> done;
      if (!s_selected.empty()) done = read_id_list(s_selected);
      const auto ids = select_next(c, done, cfg, s_budget);
      std::string text;
      for (const auto& id : ids) text += id + "\n";
      write_text(s_out, text);
      return 0;
    }

    if (*simulate) {
      CampaignConfig cfg = load_config(m_config);
      if (!m_strategy.empty()) cfg.acquisition.strategy = parse_strategy(m_strategy);
      if (m_seed) cfg.seed = cfg.acquisition.seed = *m_seed;
      cfg.validate();
      if (cfg.corpus_path.empty()) throw ConfigError("simulate needs 'corpus' in the config");
      const Corpus c = load_corpus(cfg.corpus_path, CorpusFormat::Jsonl, cfg.source_lang, cfg.target_lang);
      const auto result = run_campaign(c, cfg);
      write_text(m_out, result.metrics);
      if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        write_text((std::filesystem::path(cfg.output_dir) / "metrics.jsonl").string(), result.metrics);
        const auto dir = std::filesystem::path(cfg.output_dir) / "selections";
        std::filesystem::create_directories(dir);
        for (std::size_t q = 0; q < result.state.selections.size(); ++q) {
          write_id_list(result.state.selections[q], (dir / ("round_" + std::to_string(q + 1) + ".txt")).string());
        }
      }
      return 0;
    }

    if (*tune) {
      CampaignConfig cfg = t_config.empty() ? CampaignConfig{} : load_config(t_config);
      if (!t_corpus.empty()) cfg.corpus_path = t_corpus;
      if (cfg.corpus_path.empty()) throw ConfigError("tune needs --corpus or a config with 'corpus'");
      const TuningGrid grid = t_grid.empty() ? TuningGrid{} : load_grid(t_grid);
      // Only the source side is loaded.
      Corpus c = load_corpus(cfg.corpus_path, CorpusFormat::Jsonl, cfg.source_lang, cfg.target_lang);
      c = source_view(c);
      auto parser = make_parser(cfg);
      const auto r = tune_hyperparameters(c, grid, cfg, *parser);
      std::cout << "alpha\tbeta\tdev_accuracy\tselected\n";
      for (const auto& cell : r.table) {
        std::cout << cell.alpha << "\t" << cell.beta << "\t" << std::setprecision(6) << cell.dev_accuracy << "\t"
                  << cell.selected << "\n";
      }
      std::cout << "best alpha = " << r.alpha << ", beta = " << r.beta << " (" << r.cycles << " cycles)\n";
      return 0;
    }

    if (*serve) {
      ServiceOptions opts;
      opts.journal_dir = h_journal;
      opts.show_lf = h_show_lf;
      AnnotationService service(opts);
      g_service = &service;
      std::signal(SIGINT, [](int) {
        if (g_service) g_service->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (g_service) g_service->stop();
      });
      std::cerr << "listening on " << h_host << ":" << h_port << "\n";
      if (!service.listen(h_host, h_port)) throw Error("cannot listen on " + h_host + ":" + std::to_string(h_port));
      g_service = nullptr;
      return 0;
    }

    if (*synth) {
      const Corpus c = synthetic_corpus();
      save_corpus(c, y_out);
      if (!y_lexicon.empty()) {
        std::string tsv;
        for (const auto& [s, t] : synthetic_lexicon()) tsv += s + "\t" + t + "\n";
        write_text(y_lexicon, tsv);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
