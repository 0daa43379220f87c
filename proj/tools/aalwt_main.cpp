// aalwt: train, apply and inspect the lifting-wavelet autoencoder codec.
//
// Subcommands: train, compress, decompress, evaluate, synth, plot.
// Every run is reproducible: the same inputs and seed give byte-identical
// output files. Bad flags exit with 2, pipeline errors with 1.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aalwt/metrics.hpp"
#include "aalwt/model_io.hpp"
#include "aalwt/pipeline.hpp"
#include "aalwt/plot.hpp"
#include "aalwt/signal_io.hpp"
#include "aalwt/training.hpp"

namespace {

using namespace aalwt;

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
  if (!out) throw std::runtime_error("write error: " + path);
}

struct InputOptions {
  std::string path;
  std::string format = "raw-f32-le";
  double rate = 1.0;
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--input", in.path, "input sample file")->required();
  cmd->add_option("--format", in.format,
                  "input format: raw-f32-le | raw-f64-le | csv");
  cmd->add_option("--rate", in.rate, "sample rate of the input in Hz");
}

SampleRecord load_input(const InputOptions& in) {
  return load_samples(in.path, sample_format_from_string(in.format), in.rate);
}

int run(int argc, char** argv) {
  CLI::App app{"lifting-wavelet autoencoder codec for 1-D sensor data"};
  app.require_subcommand(1);
  // Config files use one [section] per subcommand; the flag may appear before
  // or after the subcommand (fallthrough below).
  app.set_config("--config", "", "read option defaults from a config file");

  // --- train ---------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train a model on a recording");
  train->fallthrough();
  InputOptions train_in;
  add_input_options(train, train_in);
  std::string out_model, out_log;
  TrainConfig tcfg;
  CodecConfig ccfg;
  double train_fraction = 1.0;
  std::string stop_policy = "below-sustained";
  bool freeze_thresholds = false;
  train->add_option("--out-model", out_model, "model file to write")->required();
  train->add_option("--out-log", out_log, "training log CSV (default: <out-model>.log.csv)");
  train->add_option("--epochs", tcfg.epochs_max, "maximum epochs");
  train->add_option("--batch", tcfg.batch_size, "mini-batch size");
  train->add_option("--lr", tcfg.learning_rate, "learning rate");
  train->add_option("--lambda", tcfg.lambda, "sparsity target in (0,1)");
  train->add_option("--omega", tcfg.omega, "sparsity penalty weight");
  train->add_option("--phi", tcfg.phi, "stopping-rule threshold in (0,1]");
  train->add_option("--stop-policy", stop_policy,
                    "below-sustained | above-literal");
  train->add_option("--seed", tcfg.seed, "RNG seed");
  train->add_option("--M", tcfg.M, "segment length");
  train->add_option("--hidden", tcfg.hidden, "decoder hidden width");
  train->add_option("--monitor", tcfg.monitor_batch,
                    "segments monitored for the stop signal");
  train->add_option("--mu", ccfg.mu, "quantizer exponent stored in the model");
  train->add_option("--alpha", ccfg.alpha, "quantizer divisor stored in the model");
  train->add_option("--train-fraction", train_fraction,
                    "train on the leading fraction of the input (1 = all)");
  train->add_flag("--freeze-thresholds", freeze_thresholds,
                  "disable the threshold gradient surrogate");

  // --- compress / decompress ------------------------------------------------
  auto* compress = app.add_subcommand("compress", "compress a recording");
  compress->fallthrough();
  InputOptions comp_in;
  add_input_options(compress, comp_in);
  std::string comp_model, comp_out;
  compress->add_option("--model", comp_model, "model file")->required();
  compress->add_option("--out", comp_out, "bitstream file to write")->required();

  auto* decompress =
      app.add_subcommand("decompress", "reconstruct samples from a bitstream");
  decompress->fallthrough();
  std::string dec_in, dec_model, dec_out;
  decompress->add_option("--input", dec_in, "bitstream file")->required();
  decompress->add_option("--model", dec_model, "model file")->required();
  decompress->add_option("--out", dec_out, "raw-f32-le sample file to write")
      ->required();

  // --- evaluate ---------------------------------------------------------------
  auto* evaluate =
      app.add_subcommand("evaluate", "compress, reconstruct and report metrics");
  evaluate->fallthrough();
  InputOptions eval_in;
  add_input_options(evaluate, eval_in);
  std::string eval_model, eval_csv;
  int eval_bits = 32;
  evaluate->add_option("--model", eval_model, "model file")->required();
  evaluate->add_option("--bin", eval_bits, "bits per original sample for CR");
  evaluate->add_option("--out-csv", eval_csv, "also write the report as CSV");

  // --- synth ------------------------------------------------------------------
  auto* synth =
      app.add_subcommand("synth", "generate a synthetic bearing recording");
  synth->fallthrough();
  SynthConfig scfg;
  std::string synth_out;
  synth->add_option("--out", synth_out, "raw-f32-le sample file to write")
      ->required();
  synth->add_option("--duration", scfg.duration_s, "duration in seconds");
  synth->add_option("--rate", scfg.sample_rate_hz, "sample rate in Hz");
  synth->add_option("--fault-hz", scfg.fault_freq_hz, "impulse repetition rate");
  synth->add_option("--resonance-hz", scfg.resonance_hz, "ring frequency");
  synth->add_option("--ring-decay", scfg.ring_decay, "envelope decay (1/s)");
  synth->add_option("--noise", scfg.noise_std, "white noise std deviation");
  synth->add_option("--amplitude", scfg.amplitude, "impulse amplitude");
  synth->add_option("--seed", scfg.seed, "RNG seed");

  // --- plot -------------------------------------------------------------------
  auto* plot = app.add_subcommand(
      "plot", "overlay two recordings in time and frequency (SVG + CSV)");
  plot->fallthrough();
  std::string plot_orig, plot_reco, plot_out;
  std::string plot_format = "raw-f32-le";
  double plot_rate = 1.0;
  plot->add_option("--original", plot_orig, "original sample file")->required();
  plot->add_option("--reconstructed", plot_reco, "reconstructed sample file")
      ->required();
  plot->add_option("--out", plot_out, "SVG file to write")->required();
  plot->add_option("--format", plot_format, "sample format of both inputs");
  plot->add_option("--rate", plot_rate, "sample rate of both inputs in Hz");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (train->parsed()) {
    tcfg.stop_policy = stop_policy_from_string(stop_policy);
    tcfg.train_thresholds = !freeze_thresholds;
    SampleRecord record = load_input(train_in);
    if (train_fraction < 1.0)
      record = split_record(record, train_fraction).first;
    const auto segments = segment_record(record, tcfg.M);
    const TrainResult result = train_model(segments, tcfg);

    Model model;
    model.encoder = result.encoder;
    model.decoder = result.decoder;
    model.config = ccfg;
    model.config.M = tcfg.M;
    model.config.hidden = tcfg.hidden;
    model.config.lambda = tcfg.lambda;
    model.config.omega = tcfg.omega;
    model.config.phi = tcfg.phi;
    model.config.learning_rate = tcfg.learning_rate;
    model.config.batch_size = tcfg.batch_size;
    model.config.seed = tcfg.seed;
    save_model(out_model, model);

    const std::string log_path =
        out_log.empty() ? out_model + ".log.csv" : out_log;
    std::ofstream log_file(log_path);
    if (!log_file) throw std::runtime_error("cannot open log file: " + log_path);
    write_train_log_csv(log_file, result.log);
    std::cout << "trained " << result.log.epochs.size() << " epochs on "
              << segments.size() << " segments; model " << out_model
              << ", log " << log_path << '\n';
    if (!result.log.epochs.empty()) {
      const auto& last = result.log.epochs.back();
      std::cout << "final loss " << last.loss << ", nonzero fraction "
                << last.nonzero_fraction << '\n';
    }
  } else if (compress->parsed()) {
    const Model model = load_model(comp_model);
    const SampleRecord record = load_input(comp_in);
    const auto bytes = compress_record(record, model.encoder, model.config);
    write_bytes(comp_out, bytes);
    std::cout << "compressed " << record.samples.size() << " samples into "
              << bytes.size() << " bytes\n";
  } else if (decompress->parsed()) {
    const Model model = load_model(dec_model);
    const auto bytes = read_bytes(dec_in);
    const auto samples = decompress_stream(bytes, model.decoder);
    SampleRecord rec;
    rec.samples = samples;
    save_samples(dec_out, rec, SampleFormat::RawF32Le);
    std::cout << "reconstructed " << samples.size() << " samples to " << dec_out
              << '\n';
  } else if (evaluate->parsed()) {
    const Model model = load_model(eval_model);
    CodecConfig cfg = model.config;
    cfg.sample_bits = eval_bits;
    const SampleRecord record = load_input(eval_in);
    const MetricsReport report =
        evaluate_record(record, model.encoder, model.decoder, cfg);
    std::cout << metrics_table(report);
    if (!eval_csv.empty()) {
      std::ofstream out(eval_csv);
      if (!out) throw std::runtime_error("cannot open file: " + eval_csv);
      out << metrics_csv(report);
    }
  } else if (synth->parsed()) {
    const SampleRecord record = synthesize_bearing(scfg);
    save_samples(synth_out, record, SampleFormat::RawF32Le);
    std::cout << "wrote " << record.samples.size() << " samples at "
              << scfg.sample_rate_hz << " Hz to " << synth_out << '\n';
  } else if (plot->parsed()) {
    const SampleFormat format = sample_format_from_string(plot_format);
    const SampleRecord orig = load_samples(plot_orig, format, plot_rate);
    const SampleRecord reco = load_samples(plot_reco, format, plot_rate);
    emit_plot(orig, reco, plot_out);
    std::cout << "wrote " << plot_out << " and " << plot_out << ".csv\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "aalwt: " << e.what() << '\n';
    return 1;
  }
}
