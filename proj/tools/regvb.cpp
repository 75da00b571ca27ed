// regvb: command-line front end for preparing spectral corpora, building the
// dependency matrix, training standard/regularized LDA and evaluating models.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regvb/corpus.hpp"
#include "regvb/depmat.hpp"
#include "regvb/eval.hpp"
#include "regvb/kernels.hpp"
#include "regvb/lda.hpp"
#include "regvb/model_io.hpp"
#include "regvb/reg_lda.hpp"
#include "regvb/sparse.hpp"
#include "regvb/spectral.hpp"

namespace fs = std::filesystem;
using namespace regvb;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// ---------------------------------------------------------------- prepare

struct PrepareArgs {
  std::vector<std::string> cubes;
  std::vector<std::string> references;
  std::vector<std::string> masks;
  std::vector<std::string> groups;
  std::vector<std::string> pairs;
  SpectralWordSpec spec;
  std::size_t block = 5;
  std::string binning = "equal";
  bool raw_pairs = false;
  std::string out_dir = ".";
};

template <typename T>
const T& per_cube(const std::vector<T>& v, std::size_t i, const char* what) {
  if (v.size() == 1) return v[0];
  if (v.size() <= i) throw std::invalid_argument(std::string("need one ") + what + " per cube or a single shared one");
  return v[i];
}

int cmd_prepare(const PrepareArgs& a) {
  const fs::path dir(a.out_dir);
  Binning mode = Binning::kEqualWidth;
  if (a.binning == "per-band") mode = Binning::kPerBandEqualWidth;
  else if (a.binning == "quantile") mode = Binning::kPerBandQuantile;

  std::vector<HyperCube> cubes;
  std::vector<PixelMask> masks;
  SpectralWordSpec spec = a.spec;
  for (std::size_t i = 0; i < a.cubes.size(); ++i) {
    HyperCube cube = load_cube(a.cubes[i]);
    if (!a.references.empty()) cube = normalize_reflectance(cube, load_reference(per_cube(a.references, i, "reference")));
    cube = crop_bands(cube, spec.band_lo, spec.band_hi);
    if (i > 0 && cube.bands != cubes[0].bands)
      throw std::invalid_argument(a.cubes[i] + ": band grid differs from the first cube");
    PixelMask mask = a.masks.empty() ? PixelMask::all(cube.height, cube.width) : load_mask(per_cube(a.masks, i, "mask"));
    cubes.push_back(std::move(cube));
    masks.push_back(std::move(mask));
  }
  const std::vector<double> wavelengths = cubes[0].bands;
  spec.Wl = wavelengths.size();

  // Data-driven bins are fitted once on the kept pixels of all cubes, so a
  // word means the same reflectance range in every image.
  ReflectanceBinner binner(spec);
  if (mode != Binning::kEqualWidth) {
    HyperCube pooled(1, 0, wavelengths);
    for (std::size_t i = 0; i < cubes.size(); ++i) {
      if (masks[i].height != cubes[i].height || masks[i].width != cubes[i].width)
        throw std::invalid_argument(a.cubes[i] + ": mask size differs from the cube");
      for (std::size_t y = 0; y < cubes[i].height; ++y)
        for (std::size_t x = 0; x < cubes[i].width; ++x)
          if (masks[i].kept(y, x)) {
            auto px = cubes[i].pixel(y, x);
            pooled.reflectance.insert(pooled.reflectance.end(), px.begin(), px.end());
            ++pooled.width;
          }
    }
    binner = ReflectanceBinner::fit(spec, mode, pooled, PixelMask::all(1, pooled.width));
  }

  std::vector<SparseDocument> docs;
  CooccurrenceAccumulator cooc(spec.vocab_size());
  std::ostringstream manifest;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    const Corpus pixels = discretize(cubes[i], spec, masks[i], binner);

    // Co-occurrences come from block-averaged signatures.
    const HyperCube agg = aggregate_blocks(cubes[i], a.block);
    if (agg.num_pixels() > 0) {
      const Corpus signatures = discretize(agg, spec, aggregate_mask(masks[i], a.block), binner);
      const auto counts = spectral_cooccurrences(signatures, spec, SpectralWindow{!a.raw_pairs});
      // add_event writes both directions; feed each unordered pair once.
      for (const auto& [r, c, v] : counts.counts.triplets())
        if (c > r) cooc.add_event(r, c, v);
    }

    const std::string image = fs::path(a.cubes[i]).stem().string();
    const std::string group = a.groups.empty() ? "all" : per_cube(a.groups, i, "group");
    const std::string pair = a.pairs.empty() ? image : per_cube(a.pairs, i, "pair key");
    manifest << image << ' ' << group << ' ' << pair << ' ' << docs.size() << ' ' << pixels.num_docs() << '\n';
    docs.insert(docs.end(), pixels.docs().begin(), pixels.docs().end());
  }
  if (docs.empty()) throw std::invalid_argument("no kept pixels in any cube");

  const Corpus corpus(std::move(docs), spectral_vocabulary(spec, wavelengths));
  fs::create_directories(dir);
  save_bow(corpus, dir / "corpus.bow");
  save_vocabulary(corpus.vocab(), dir / "vocab.txt");
  save_counts(cooc.finish().counts, dir / "cooc.mtx");
  auto out = open_out(dir / "manifest.txt");
  out << manifest.str();
  finish(out, dir / "manifest.txt");
  std::cout << "documents " << corpus.num_docs() << "\nbands " << spec.Wl << "\nvocabulary " << corpus.vocab_size()
            << '\n';
  return 0;
}

// ---------------------------------------------------------------- build-c

struct BuildCArgs {
  std::string cooc;
  std::string corpus;
  std::size_t top_n = 1000;
  bool no_normalize = false;
  std::string out;
};

int cmd_build_c(const BuildCArgs& a) {
  const auto counts = CooccurrenceCounts::from_counts(load_counts(a.cooc));
  std::vector<double> freqs;
  if (!a.corpus.empty()) {
    freqs = load_bow(a.corpus).word_frequencies();
    if (freqs.size() != counts.size()) throw std::invalid_argument("corpus vocabulary size differs from co-occurrence size");
  } else {
    freqs.assign(counts.marginals.begin(), counts.marginals.end());
  }
  const SparseMatrix p = counts.total > 0 ? pmi(counts) : SparseMatrix(counts.size());
  const DependencyMatrix C = build_dependency_matrix(p, std::min(a.top_n, counts.size()), freqs, DependencyOptions{!a.no_normalize});
  save_sparse(C.matrix(), a.out);
  std::cout << "size " << C.size() << "\nnnz " << C.matrix().nnz() << '\n';
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string corpus;
  std::string mode = "standard";
  std::string schedule = "online";
  Hyperparameters hyper{};
  std::size_t batch_size = 1024;
  double kappa = 0.51;
  double tau0 = 1024.0;
  std::size_t reg_iter = 10;
  std::uint64_t seed = 0;
  std::size_t passes = 1;
  std::size_t max_updates = 0;
  std::size_t max_epochs = 100;
  double tol = 1e-6;
  int threads = 1;
  std::string sampling = "independent";
  std::string responsibility = "target";
  std::string c_path;
  std::string out;
  std::string metrics;
  bool with_beta = false;
};

int cmd_train(const TrainArgs& a) {
  const Corpus corpus = load_bow(a.corpus);
  a.hyper.validate();
  const bool online = a.schedule == "online";
  const SamplingMode sampling = a.sampling == "shuffle" ? SamplingMode::kEpochShuffle : SamplingMode::kIndependent;
  const LearningRate rate{a.tau0, a.kappa};
  std::vector<UpdateRecord> trace;

  if (a.mode == "standard") {
    StandardFit fit;
    if (online) {
      OnlineOptions o;
      o.batch_size = std::min(a.batch_size, corpus.num_docs());
      o.rate = rate;
      o.passes = a.passes;
      if (a.max_updates) o.max_updates = a.max_updates;
      o.sampling = sampling;
      o.seed = a.seed;
      o.threads = a.threads;
      fit = online_vb_fit(corpus, a.hyper, o);
    } else {
      BatchOptions o;
      o.max_epochs = a.max_epochs;
      o.tol = a.tol;
      o.seed = a.seed;
      o.threads = a.threads;
      fit = batch_vb_fit(corpus, a.hyper, o);
    }
    auto out = open_out(a.out);
    write_standard_model(out, fit.model, a.with_beta);
    finish(out, a.out);
    trace = std::move(fit.trace);
  } else {
    if (a.c_path.empty()) throw std::invalid_argument("regularized training needs --C");
    auto C = std::make_shared<const DependencyMatrix>(load_sparse(a.c_path));
    if (C->size() != corpus.vocab_size()) throw std::invalid_argument("C size differs from the corpus vocabulary");
    const ResponsibilityForm form =
        a.responsibility == "source" ? ResponsibilityForm::kSource : ResponsibilityForm::kTarget;
    RegularizedFit fit;
    if (online) {
      RegOnlineOptions o;
      o.reg_iter = a.reg_iter;
      o.form = form;
      o.seed = a.seed;
      o.threads = a.threads;
      o.batch_size = std::min(a.batch_size, corpus.num_docs());
      o.rate = rate;
      o.passes = a.passes;
      if (a.max_updates) o.max_updates = a.max_updates;
      o.sampling = sampling;
      fit = reg_online_fit(corpus, C, a.hyper, o);
    } else {
      RegBatchOptions o;
      o.reg_iter = a.reg_iter;
      o.form = form;
      o.seed = a.seed;
      o.threads = a.threads;
      o.max_epochs = a.max_epochs;
      o.tol = a.tol;
      fit = reg_batch_fit(corpus, C, a.hyper, o);
    }
    auto out = open_out(a.out);
    write_regularized_model(out, fit.model, fs::absolute(a.c_path).lexically_normal().string());
    finish(out, a.out);
    trace = std::move(fit.trace);
  }

  if (!a.metrics.empty()) {
    auto m = open_out(a.metrics);
    write_trace_csv(m, trace);
    finish(m, a.metrics);
  }
  std::cout << "updates " << trace.size() << '\n';
  if (!trace.empty()) std::cout << "bound " << format_double(trace.back().bound) << '\n';
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string model;
  std::string corpus;
  std::string manifest;
  std::size_t topic_num = 0;
  std::size_t topic_den = 1;
  int threads = 1;
  std::string expectations_out;
  std::string ratio_out;
  std::string group_a, group_b;
};

struct ManifestEntry {
  std::string image, group, pair;
  std::size_t first = 0, count = 0;
};

std::vector<ManifestEntry> load_manifest(const fs::path& path, std::size_t num_docs) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    ManifestEntry e;
    if (!(ss >> e.image >> e.group >> e.pair >> e.first >> e.count))
      throw ParseError("manifest: expected '<image> <group> <pair_key> <first_doc> <doc_count>'", lineno);
    if (e.count == 0 || e.first + e.count > num_docs) throw ParseError("manifest: document range outside the corpus", lineno);
    entries.push_back(std::move(e));
  }
  return entries;
}

Matrix model_log_weights(const LoadedModel& m, std::shared_ptr<const DependencyMatrix>* C_out) {
  if (!m.regularized) return expected_log_beta(m.params);
  auto C = std::make_shared<const DependencyMatrix>(load_sparse(m.c_path));
  if (C_out) *C_out = C;
  return convolved_log_weights(m.params, *C);
}

int cmd_eval(const EvalArgs& a) {
  const LoadedModel model = load_model(a.model);
  const Corpus corpus = load_bow(a.corpus);
  if (model.params.cols() != corpus.vocab_size()) throw std::invalid_argument("model and corpus vocabularies differ");
  const std::size_t K = model.params.rows();

  std::vector<std::size_t> all(corpus.num_docs());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Matrix weights = model_log_weights(model, nullptr);
  const auto res = kernels::estep(corpus, all, weights, model.hyper.alpha, EStepOptions{}, true, a.threads);
  Matrix gammas(corpus.num_docs(), K);
  for (std::size_t d = 0; d < corpus.num_docs(); ++d)
    std::copy(res.posteriors[d].gamma.begin(), res.posteriors[d].gamma.end(), gammas.row(d).begin());

  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", background_distance(gammas));
  std::cout << "Ms " << buf << '\n';

  if (a.manifest.empty()) return 0;
  const auto entries = load_manifest(a.manifest, corpus.num_docs());

  Matrix expected(entries.size(), K);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    Matrix rows(e.count, K);
    for (std::size_t j = 0; j < e.count; ++j) {
      auto g = gammas.row(e.first + j);
      const double s = std::accumulate(g.begin(), g.end(), 0.0);
      for (std::size_t k = 0; k < K; ++k) rows(j, k) = std::max(g[k] / s, kProbabilityFloor);
    }
    if (e.count >= 2) {
      const auto est = dirichlet_mle(normalize_rows(rows));
      std::copy(est.expected.begin(), est.expected.end(), expected.row(i).begin());
    } else {
      std::cerr << "warning: image " << e.image << " has one document; using its topic proportions\n";
      std::copy(rows.row(0).begin(), rows.row(0).end(), expected.row(i).begin());
    }
  }
  if (!a.expectations_out.empty()) {
    auto out = open_out(a.expectations_out);
    out << "image,group,pair";
    for (std::size_t k = 0; k < K; ++k) out << ",topic" << k;
    out << '\n';
    for (std::size_t i = 0; i < entries.size(); ++i) {
      out << entries[i].image << ',' << entries[i].group << ',' << entries[i].pair;
      for (std::size_t k = 0; k < K; ++k) out << ',' << format_double(expected(i, k));
      out << '\n';
    }
    finish(out, a.expectations_out);
  }

  std::vector<std::string> groups;
  for (const auto& e : entries)
    if (std::find(groups.begin(), groups.end(), e.group) == groups.end()) groups.push_back(e.group);
  std::string ga = a.group_a, gb = a.group_b;
  if (ga.empty() && gb.empty() && groups.size() == 2) {
    ga = groups[0];
    gb = groups[1];
  }
  if (ga.empty() || gb.empty()) {
    std::cerr << "warning: " << groups.size() << " group(s) in the manifest; the ratio test needs two, skipped\n";
    return 0;
  }
  if (a.topic_num >= K || a.topic_den >= K) throw std::invalid_argument("topic index out of range");

  std::map<std::string, std::size_t> in_b;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].group == gb) in_b[entries[i].pair] = i;
  std::vector<std::size_t> ia, ib;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].group != ga) continue;
    auto it = in_b.find(entries[i].pair);
    if (it == in_b.end()) continue;
    ia.push_back(i);
    ib.push_back(it->second);
  }
  if (ia.size() < 2) {
    std::cerr << "warning: fewer than two paired images between " << ga << " and " << gb << ", ratio test skipped\n";
    return 0;
  }
  Matrix A(ia.size(), K), B(ib.size(), K);
  for (std::size_t j = 0; j < ia.size(); ++j) {
    std::copy(expected.row(ia[j]).begin(), expected.row(ia[j]).end(), A.row(j).begin());
    std::copy(expected.row(ib[j]).begin(), expected.row(ib[j]).end(), B.row(j).begin());
  }
  const auto rt = topic_ratio_test(A, B, a.topic_num, a.topic_den);
  if (rt.excluded) std::cerr << "warning: " << rt.excluded << " pair(s) excluded for a zero denominator\n";
  std::cout << "t " << format_double(rt.test.t) << "\np " << format_double(rt.test.p) << "\ndof " << rt.test.dof << '\n';
  if (!a.ratio_out.empty()) {
    auto out = open_out(a.ratio_out);
    out << "pair," << ga << ',' << gb << '\n';
    for (std::size_t j = 0; j < rt.pairs.size(); ++j)
      out << entries[ia[rt.pairs[j]]].pair << ',' << format_double(rt.ratios_a[j]) << ','
          << format_double(rt.ratios_b[j]) << '\n';
    out << "t," << format_double(rt.test.t) << ",\np," << format_double(rt.test.p) << ",\n";
    finish(out, a.ratio_out);
  }
  return 0;
}

// ---------------------------------------------------------------- export-topics

int cmd_export(const std::string& model_path, const std::string& vocab_path, std::size_t top) {
  const LoadedModel model = load_model(model_path);
  Matrix beta;
  if (model.beta) beta = *model.beta;
  else if (model.regularized) beta = compute_beta(model.params, DependencyMatrix(load_sparse(model.c_path)));
  else beta = geometric_topics(model.params);
  const Vocabulary vocab = vocab_path.empty() ? Vocabulary::indexed(beta.cols()) : load_vocabulary(vocab_path);
  if (vocab.size() != beta.cols()) throw std::invalid_argument("vocabulary size differs from the model");

  top = std::min(top, beta.cols());
  for (std::size_t k = 0; k < beta.rows(); ++k) {
    std::vector<std::size_t> idx(beta.cols());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(top), idx.end(),
                      [&](std::size_t x, std::size_t y) { return beta(k, x) > beta(k, y) || (beta(k, x) == beta(k, y) && x < y); });
    std::cout << "topic " << k << '\n';
    char buf[32];
    for (std::size_t i = 0; i < top; ++i) {
      std::snprintf(buf, sizeof buf, "%.6f", beta(k, idx[i]));
      std::cout << "  " << vocab.term(static_cast<WordId>(idx[i])) << ' ' << buf << '\n';
    }
  }
  return 0;
}

// key=value file (CLI11's INI reader) applied to a subcommand; options
// already given on the command line keep their values.
void apply_config(CLI::App& sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  for (const auto& item : CLI::ConfigINI().from_config(in)) {
    CLI::Option* opt = sub.get_option_no_throw("--" + item.name);
    if (!opt) opt = sub.get_option_no_throw("-" + item.name);
    if (!opt || item.name == "config") throw std::invalid_argument("config: unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;
    for (const auto& v : item.inputs) opt->add_result(v);
    opt->run_callback();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Standard and regularized variational LDA"};
  app.require_subcommand(1);

  PrepareArgs prep;
  auto* p = app.add_subcommand("prepare", "Turn hyperspectral cubes into a spectral-word corpus");
  p->add_option("--cube", prep.cubes, "HSC1 cube file (repeatable)")->required()->check(CLI::ExistingFile);
  p->add_option("--reference", prep.references, "White reference spectrum, shared or one per cube")->check(CLI::ExistingFile);
  p->add_option("--mask", prep.masks, "PBM keep mask, shared or one per cube")->check(CLI::ExistingFile);
  p->add_option("--group", prep.groups, "Group label per cube for the manifest");
  p->add_option("--pair", prep.pairs, "Pair key per cube for the manifest");
  p->add_option("--lo", prep.spec.band_lo, "Lowest retained wavelength (nm)")->capture_default_str();
  p->add_option("--hi", prep.spec.band_hi, "Highest retained wavelength (nm)")->capture_default_str();
  p->add_option("--bins", prep.spec.R, "Reflectance bins per band")->capture_default_str()->check(CLI::PositiveNumber);
  p->add_option("--refl-lo", prep.spec.reflectance_lo, "Lower reflectance bound")->capture_default_str();
  p->add_option("--refl-hi", prep.spec.reflectance_hi, "Upper reflectance bound")->capture_default_str();
  p->add_option("--block", prep.block, "Tile size for co-occurrence signatures")->capture_default_str()->check(CLI::PositiveNumber);
  p->add_option("--binning", prep.binning, "equal | per-band | quantile")
      ->capture_default_str()->check(CLI::IsMember({"equal", "per-band", "quantile"}));
  p->add_flag("--raw-pairs", prep.raw_pairs, "Pair adjacent bands regardless of their bins");
  p->add_option("--out-dir", prep.out_dir, "Output directory")->capture_default_str();

  BuildCArgs bc;
  auto* b = app.add_subcommand("build-c", "Build the word dependency matrix from co-occurrence counts");
  b->add_option("--cooc", bc.cooc, "Co-occurrence count file")->required()->check(CLI::ExistingFile);
  b->add_option("--corpus", bc.corpus, "Corpus supplying word frequencies (default: co-occurrence marginals)")
      ->check(CLI::ExistingFile);
  b->add_option("--top-n", bc.top_n, "Most frequent words that keep dependencies")->capture_default_str();
  b->add_flag("--no-normalize", bc.no_normalize, "Skip row normalization");
  b->add_option("--out", bc.out, "Output sparse matrix file")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Fit a topic model");
  std::string config_path;
  t->add_option("--config", config_path, "key=value configuration file; command-line flags take precedence")
      ->check(CLI::ExistingFile);
  t->add_option("--corpus", tr.corpus, "Bag-of-words corpus")->check(CLI::ExistingFile);
  t->add_option("--mode", tr.mode, "standard | regularized")
      ->capture_default_str()->check(CLI::IsMember({"standard", "regularized"}));
  t->add_option("--schedule", tr.schedule, "online | batch")
      ->capture_default_str()->check(CLI::IsMember({"online", "batch"}));
  t->add_option("-K,--topics", tr.hyper.K, "Number of topics")->capture_default_str();
  t->add_option("--alpha", tr.hyper.alpha, "Document-topic prior")->capture_default_str();
  t->add_option("--eta", tr.hyper.eta, "Topic-word prior")->capture_default_str();
  t->add_option("-S,--batch-size", tr.batch_size, "Mini-batch size (capped at D)")->capture_default_str()->check(CLI::PositiveNumber);
  t->add_option("--kappa", tr.kappa, "Forgetting rate")->capture_default_str();
  t->add_option("--tau0", tr.tau0, "Delay")->capture_default_str();
  t->add_option("--reg-iter", tr.reg_iter, "Fixed-point sweeps per M-step")->capture_default_str();
  t->add_option("--seed", tr.seed, "Random seed")->capture_default_str();
  t->add_option("--passes", tr.passes, "Passes over the corpus (online)")->capture_default_str()->check(CLI::PositiveNumber);
  t->add_option("--max-updates", tr.max_updates, "Exact number of online updates (overrides --passes)");
  t->add_option("--max-epochs", tr.max_epochs, "Epoch limit (batch)")->capture_default_str();
  t->add_option("--tol", tr.tol, "Relative bound tolerance (batch)")->capture_default_str();
  t->add_option("--threads", tr.threads, "E-step threads")->capture_default_str()->check(CLI::PositiveNumber);
  t->add_option("--sampling", tr.sampling, "independent | shuffle")
      ->capture_default_str()->check(CLI::IsMember({"independent", "shuffle"}));
  t->add_option("--responsibility", tr.responsibility, "target | source")
      ->capture_default_str()->check(CLI::IsMember({"target", "source"}));
  t->add_option("--C", tr.c_path, "Dependency matrix (regularized mode)")->check(CLI::ExistingFile);
  t->add_option("--out", tr.out, "Model output file");
  t->add_option("--metrics", tr.metrics, "Per-update CSV of bound and GRT");
  t->add_flag("--with-beta", tr.with_beta, "Also write topic-word probabilities for standard models");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a fitted model");
  e->add_option("--model", ev.model, "Model file")->required()->check(CLI::ExistingFile);
  e->add_option("--corpus", ev.corpus, "Bag-of-words corpus")->required()->check(CLI::ExistingFile);
  e->add_option("--manifest", ev.manifest, "Image manifest from prepare")->check(CLI::ExistingFile);
  e->add_option("--topic-num", ev.topic_num, "Numerator topic of the ratio test")->capture_default_str();
  e->add_option("--topic-den", ev.topic_den, "Denominator topic of the ratio test")->capture_default_str();
  e->add_option("--group-a", ev.group_a, "First group of the ratio test");
  e->add_option("--group-b", ev.group_b, "Second group of the ratio test");
  e->add_option("--expectations", ev.expectations_out, "CSV of per-image expected topic probabilities");
  e->add_option("--ratios", ev.ratio_out, "CSV of the ratio test");
  e->add_option("--threads", ev.threads, "E-step threads")->capture_default_str()->check(CLI::PositiveNumber);

  std::string ex_model, ex_vocab;
  std::size_t ex_top = 10;
  auto* x = app.add_subcommand("export-topics", "Print the highest-probability words of each topic");
  x->add_option("--model", ex_model, "Model file")->required()->check(CLI::ExistingFile);
  x->add_option("--vocab", ex_vocab, "Vocabulary file")->check(CLI::ExistingFile);
  x->add_option("--top", ex_top, "Words per topic")->capture_default_str()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (p->parsed()) return cmd_prepare(prep);
    if (b->parsed()) return cmd_build_c(bc);
    if (t->parsed()) {
      if (!config_path.empty()) apply_config(*t, config_path);
      if (tr.corpus.empty() || tr.out.empty()) throw std::invalid_argument("train needs --corpus and --out");
      return cmd_train(tr);
    }
    if (e->parsed()) return cmd_eval(ev);
    if (x->parsed()) return cmd_export(ex_model, ex_vocab, ex_top);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 1;
}
