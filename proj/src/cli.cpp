#include "evhmm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "evhmm/corpus.hpp"
#include "evhmm/model_file.hpp"
#include "evhmm/synthetic.hpp"
#include "evhmm/tagger.hpp"

namespace evhmm {

namespace {

struct Options {
  std::string input = "-";
  std::string second_input;
  std::string model_path;
  int order = 1;
  std::string paradigm = "prob";
  std::string bba = "consonant";
  std::string lambda = "brants";
  Count unk_threshold = 1;
  double add_k = 0.001;
  std::uint64_t seed = 1;
  std::size_t sentences = 250;
};

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

template <typename F>
auto with_input(const std::string& path, std::istream& in, F&& fn) {
  if (path == "-") return fn(in);
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + path + "'");
  return fn(file);
}

std::vector<TaggedSentence> read_corpus(const std::string& path, std::istream& in) {
  return with_input(path, in, [&](std::istream& s) {
    try {
      return parse_tagged_corpus(s);
    } catch (const ParseError& e) {
      throw InputError(path + ": " + e.what());
    }
  });
}

Model read_model_file(const std::string& path, std::istream& in) {
  return with_input(path, in, [](std::istream& s) { return read_model(s); });
}

std::vector<std::string> words_of(const TaggedSentence& sentence) {
  std::vector<std::string> words;
  for (const auto& tok : sentence) words.push_back(tok.surface);
  return words;
}

// Model configuration, overridden by flags given on the command line.
TaggerConfig tagger_config(const Options& opt, const Model& model, const CLI::App& cmd) {
  TaggerConfig config;
  config.order = opt.order;
  config.paradigm = parse_paradigm(opt.paradigm);
  config.bba_mode = parse_bba_mode(opt.bba);
  config.lambda_mode = cmd.count("--lambda") ? parse_lambda_mode(opt.lambda) : model.config.lambda_mode;
  config.add_k = cmd.count("--add-k") ? opt.add_k : model.config.add_k;
  return config;
}

int cmd_train(const Options& opt, const CLI::App& cmd, Io io) {
  auto corpus = read_corpus(opt.input, io.in);
  Model model;
  model.counts = accumulate_counts(corpus, opt.unk_threshold);
  model.config.unk_threshold = opt.unk_threshold;
  model.config.add_k = opt.add_k;
  if (cmd.count("--lambda")) model.config.lambda_mode = parse_lambda_mode(opt.lambda);

  std::ostream* report = &io.out;
  if (opt.model_path == "-") {
    write_model(io.out, model);
    report = &io.err;
  } else {
    save_model(model, opt.model_path);
  }

  Count unk_tokens = 0;
  std::vector<std::string> tokens;
  for (const auto& [key, n] : model.counts.emissions) {
    if (key.second == kUnknownToken) {
      unk_tokens += n;
    } else {
      tokens.push_back(key.second);
    }
  }
  std::sort(tokens.begin(), tokens.end());
  auto types = std::unique(tokens.begin(), tokens.end()) - tokens.begin();

  *report << "sentences\t" << model.counts.num_sentences() << '\n'
          << "tokens\t" << model.counts.total_tokens << '\n'
          << "tags\t" << model.counts.num_tags() << '\n'
          << "vocab\t" << types << '\n'
          << "unk_tokens\t" << unk_tokens << '\n';
  return kExitOk;
}

void warn_ignored(const Options& opt, const CLI::App& cmd, std::ostream& err) {
  if (opt.paradigm == "prob" && cmd.count("--bba")) err << "warning: --bba is ignored for the prob paradigm\n";
  if (opt.order == 1 && cmd.count("--lambda")) err << "warning: --lambda is ignored for order 1\n";
}

int cmd_tag(const Options& opt, const CLI::App& cmd, Io io) {
  if (opt.input == "-" && opt.model_path == "-") throw CLI::ValidationError("model and input cannot both be stdin");
  warn_ignored(opt, cmd, io.err);
  Model model = read_model_file(opt.model_path, io.in);
  Tagger tagger(model, tagger_config(opt, model, cmd));

  std::vector<std::vector<std::string>> sentences = with_input(opt.input, io.in, [](std::istream& s) {
    std::vector<std::vector<std::string>> out;
    std::string line;
    while (std::getline(s, line)) {
      std::istringstream fields(line);
      std::vector<std::string> words;
      for (std::string w; fields >> w;) words.push_back(w);
      if (!words.empty()) out.push_back(std::move(words));
    }
    return out;
  });

  std::ostringstream buffer;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    std::vector<std::string> tags;
    try {
      tags = tagger.tag(sentences[s]);
    } catch (const std::exception& e) {
      io.err << "error: sentence " << s + 1 << ": " << e.what() << '\n';
      return kExitNumeric;
    }
    for (std::size_t k = 0; k < tags.size(); ++k) buffer << sentences[s][k] << '\t' << tags[k] << '\n';
    buffer << '\n';
  }
  io.out << buffer.str();
  return kExitOk;
}

int cmd_eval(const Options& opt, Io io) {
  if (opt.input == "-" && opt.second_input == "-") throw CLI::ValidationError("only one input can be stdin");
  auto gold = read_corpus(opt.input, io.in);
  auto pred = read_corpus(opt.second_input, io.in);
  std::optional<Model> model;
  if (!opt.model_path.empty()) model = read_model_file(opt.model_path, io.in);

  if (gold.size() != pred.size()) {
    throw InputError("misaligned files: gold has " + std::to_string(gold.size()) + " sentences, predicted has " +
                     std::to_string(pred.size()));
  }
  AccuracyCounts acc;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size()) {
      throw InputError("misaligned files: sentence " + std::to_string(s + 1) + " has " +
                       std::to_string(gold[s].size()) + " gold tokens and " + std::to_string(pred[s].size()) +
                       " predicted tokens");
    }
    for (std::size_t k = 0; k < gold[s].size(); ++k) {
      if (gold[s][k].surface != pred[s][k].surface) {
        throw InputError("misaligned files: sentence " + std::to_string(s + 1) + ", token " + std::to_string(k + 1) +
                         ": '" + gold[s][k].surface + "' vs '" + pred[s][k].surface + "'");
      }
      bool known = model && model->counts.vocab.contains(gold[s][k].surface);
      acc.add(gold[s][k].tag == pred[s][k].tag, known);
    }
  }
  io.out << "tokens\t" << acc.total << '\n' << "accuracy\t" << format_accuracy(acc.correct, acc.total) << '\n';
  if (model) {
    io.out << "known_tokens\t" << acc.known_total << '\n'
           << "known_accuracy\t" << format_accuracy(acc.known_correct, acc.known_total) << '\n'
           << "unknown_tokens\t" << acc.unknown_total << '\n'
           << "unknown_accuracy\t" << format_accuracy(acc.unknown_correct, acc.unknown_total) << '\n';
  }
  return kExitOk;
}

int cmd_compare(const Options& opt, const CLI::App& cmd, Io io) {
  if (opt.input == "-" && opt.model_path == "-") throw CLI::ValidationError("model and input cannot both be stdin");
  Model model = read_model_file(opt.model_path, io.in);
  auto gold = read_corpus(opt.input, io.in);

  io.out << "decoder\taccuracy\tknown\tunknown\ttime_ms\n";
  int failures = 0;
  for (Paradigm paradigm : {Paradigm::prob, Paradigm::belief}) {
    for (int order : {1, 2}) {
      Options variant = opt;
      variant.order = order;
      variant.paradigm = std::string(to_string(paradigm));
      TaggerConfig config = tagger_config(variant, model, cmd);
      std::string name = decoder_name(config);
      auto start = std::chrono::steady_clock::now();
      AccuracyCounts acc;
      try {
        Tagger tagger(model, config);
        for (std::size_t s = 0; s < gold.size(); ++s) {
          std::vector<std::string> tags;
          try {
            tags = tagger.tag(words_of(gold[s]));
          } catch (const std::exception& e) {
            throw std::runtime_error("sentence " + std::to_string(s + 1) + ": " + e.what());
          }
          for (std::size_t k = 0; k < tags.size(); ++k) {
            acc.add(tags[k] == gold[s][k].tag, model.counts.vocab.contains(gold[s][k].surface));
          }
        }
      } catch (const std::exception& e) {
        io.err << "error: " << name << ": " << e.what() << '\n';
        io.out << name << "\tERROR\tERROR\tERROR\t-\n";
        ++failures;
        continue;
      }
      double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      char time[32];
      std::snprintf(time, sizeof time, "%.1f", ms);
      io.out << name << '\t' << format_accuracy(acc.correct, acc.total) << '\t'
             << format_accuracy(acc.known_correct, acc.known_total) << '\t'
             << format_accuracy(acc.unknown_correct, acc.unknown_total) << '\t' << time << '\n';
    }
  }
  return failures == 4 ? kExitNumeric : kExitOk;
}

int cmd_synth(const Options& opt, Io io) {
  SyntheticOptions options;
  options.sentences = opt.sentences;
  auto corpus = generate_second_order_corpus(opt.seed, options);
  if (opt.input == "-") {
    write_tagged_corpus(io.out, corpus);
    return kExitOk;
  }
  std::ofstream file(opt.input, std::ios::binary);
  if (!file) throw IoError("cannot open '" + opt.input + "' for writing");
  write_tagged_corpus(file, corpus);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app("Probabilistic and belief-function HMM taggers", "evhmm");
  app.require_subcommand(1);

  auto add_decoder_flags = [&](CLI::App* cmd) {
    cmd->add_option("--order", opt.order, "HMM order")->check(CLI::IsMember({1, 2}));
    cmd->add_option("--paradigm", opt.paradigm, "prob or belief")->check(CLI::IsMember({"prob", "belief"}));
    cmd->add_option("--bba", opt.bba, "bba construction for the belief paradigm")
        ->check(CLI::IsMember({"bayesian", "consonant", "gbt"}));
  };
  auto add_smoothing_flags = [&](CLI::App* cmd) {
    cmd->add_option("--lambda", opt.lambda, "trigram interpolation weights")
        ->check(CLI::IsMember({"brants", "thede"}));
    cmd->add_option("--add-k", opt.add_k, "additive smoothing constant")->check(CLI::NonNegativeNumber);
  };

  auto* train = app.add_subcommand("train", "count a tagged corpus into a model file");
  train->add_option("corpus", opt.input, "two-column corpus, - for stdin")->required();
  train->add_option("--model", opt.model_path, "output model file, - for stdout")->required();
  train->add_option("--unk-threshold", opt.unk_threshold, "tokens seen at most this often become <UNK>");
  add_smoothing_flags(train);

  auto* tag = app.add_subcommand("tag", "tag one whitespace-tokenized sentence per line");
  tag->add_option("input", opt.input, "input text, - for stdin")->capture_default_str();
  tag->add_option("--model", opt.model_path, "model file")->required();
  add_decoder_flags(tag);
  add_smoothing_flags(tag);

  auto* eval = app.add_subcommand("eval", "token accuracy of predicted against gold tags");
  eval->add_option("gold", opt.input, "gold corpus")->required();
  eval->add_option("predicted", opt.second_input, "predicted corpus")->required();
  eval->add_option("--model", opt.model_path, "model whose vocabulary defines known words");

  auto* compare = app.add_subcommand("compare", "run all four decoders on a gold corpus");
  compare->add_option("gold", opt.input, "gold corpus")->required();
  compare->add_option("--model", opt.model_path, "model file")->required();
  compare->add_option("--bba", opt.bba, "bba construction for the belief decoders")
      ->check(CLI::IsMember({"bayesian", "consonant", "gbt"}));
  add_smoothing_flags(compare);

  auto* synth = app.add_subcommand("synth", "generate a corpus from a second-order tag chain");
  synth->add_option("output", opt.input, "output corpus, - for stdout")->capture_default_str();
  synth->add_option("--seed", opt.seed, "random seed");
  synth->add_option("--sentences", opt.sentences, "number of sentences")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Io io{in, out, err};
  try {
    if (*train) return cmd_train(opt, *train, io);
    if (*tag) return cmd_tag(opt, *tag, io);
    if (*eval) return cmd_eval(opt, io);
    if (*compare) return cmd_compare(opt, *compare, io);
    return cmd_synth(opt, io);
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const EmptyCorpus& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const VersionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace evhmm
