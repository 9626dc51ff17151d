// Copyright 2026 The ABAE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "abae/abae.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "abae/error.hpp"

namespace abae {

void AbaeConfig::validate() const {
  if (aspects < 2) throw InvalidArgument("abae: K must be >= 2");
  if (negatives < 1) throw InvalidArgument("abae: negatives must be >= 1");
  if (batch_size < 1) throw InvalidArgument("abae: batch size must be >= 1");
  if (!(ortho_weight >= 0.0)) throw InvalidArgument("abae: orthogonality weight must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("abae: learning rate must be > 0");
}

void AbaeModel::validate() const {
  const std::size_t d = dimension();
  const std::size_t k = num_aspects();
  if (d == 0 || vocabulary_size() == 0) throw InvalidArgument("abae: empty embeddings");
  if (attention.rows() != d || attention.cols() != d) {
    throw InvalidArgument("abae: attention matrix must be d x d");
  }
  if (classifier.rows() != k || classifier.cols() != d || bias.size() != k ||
      aspects.cols() != d) {
    throw InvalidArgument("abae: classifier/aspect shapes disagree with K and d");
  }
  for (const Matrix* m : {&embeddings, &attention, &classifier, &aspects}) {
    if (!m->all_finite()) throw InvalidArgument("abae: non-finite parameter");
  }
  for (double x : bias) {
    if (!std::isfinite(x)) throw InvalidArgument("abae: non-finite parameter");
  }
}

namespace {

void check_sentence(TokenIds sentence, std::size_t vocab_size) {
  if (sentence.empty()) throw InvalidArgument("abae: empty sentence");
  for (int id : sentence) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
      throw InvalidArgument("abae: token id " + std::to_string(id) + " outside vocabulary");
    }
  }
}

std::span<const double> embedding_row(const Matrix& e, int id) {
  return e.row(static_cast<std::size_t>(id));
}

struct Forward {
  Vector y;
  Vector attention;  // a
  Vector z;
  Vector p;
  Vector r;
};

Forward forward(TokenIds sentence, const AbaeModel& model) {
  check_sentence(sentence, model.vocabulary_size());
  Forward f;
  f.y = bag_of_words(sentence, model.embeddings);
  const Vector u = matvec(model.attention, f.y);
  Vector logits(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    logits[i] = dot(embedding_row(model.embeddings, sentence[i]), u);
  }
  f.attention = softmax(logits);
  f.z.assign(model.dimension(), 0.0);
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    axpy(f.attention[i], embedding_row(model.embeddings, sentence[i]), f.z);
  }
  Vector q = matvec(model.classifier, f.z);
  for (std::size_t k = 0; k < q.size(); ++k) q[k] += model.bias[k];
  f.p = softmax(q);
  f.r = matvec_transposed(model.aspects, f.p);
  return f;
}

// d cos(a, b) / d a.
Vector cosine_gradient(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw InvalidArgument("abae: zero-norm input");
  const double c = dot(a, b) / (na * nb);
  Vector g(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) g[i] = b[i] / (na * nb) - c * a[i] / (na * na);
  return g;
}

// Softmax Jacobian-vector product: p * (g - p.g).
Vector softmax_backward(std::span<const double> p, std::span<const double> grad) {
  const double inner = dot(p, grad);
  Vector out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * (grad[i] - inner);
  return out;
}

Matrix normalized_rows(const Matrix& t, Vector* norms) {
  Matrix n(t.rows(), t.cols());
  if (norms) norms->resize(t.rows());
  for (std::size_t k = 0; k < t.rows(); ++k) {
    const double len = norm(t.row(k));
    if (len == 0.0) {
      throw InvalidArgument("orthogonality_penalty: aspect row " + std::to_string(k) + " is zero");
    }
    if (norms) (*norms)[k] = len;
    for (std::size_t j = 0; j < t.cols(); ++j) n(k, j) = t(k, j) / len;
  }
  return n;
}

// Gram residual D = Tn Tn^T - I.
Matrix gram_residual(const Matrix& tn) {
  const std::size_t k = tn.rows();
  Matrix d(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      d(i, j) = dot(tn.row(i), tn.row(j)) - (i == j ? 1.0 : 0.0);
    }
  }
  return d;
}

double frobenius(const Matrix& m) { return norm(m.values()); }

void check_negatives(std::span<const TokenIds> negatives, std::size_t v) {
  if (negatives.empty()) throw InvalidArgument("abae: at least one negative sentence is required");
  for (TokenIds n : negatives) check_sentence(n, v);
}

}  // namespace

Vector bag_of_words(TokenIds sentence, const Matrix& embeddings) {
  check_sentence(sentence, embeddings.rows());
  Vector y(embeddings.cols(), 0.0);
  for (int id : sentence) axpy(1.0, embedding_row(embeddings, id), y);
  return y;
}

Vector attention_weights(TokenIds sentence, const AbaeModel& model) {
  return forward(sentence, model).attention;
}

Vector sentence_embedding(TokenIds sentence, const AbaeModel& model) {
  return forward(sentence, model).z;
}

AspectDistribution aspect_probabilities(std::span<const double> z, const AbaeModel& model) {
  Vector q = matvec(model.classifier, z);
  for (std::size_t k = 0; k < q.size(); ++k) q[k] += model.bias[k];
  return AspectDistribution(softmax(q));
}

Vector reconstruct(std::span<const double> p, const AbaeModel& model) {
  return matvec_transposed(model.aspects, p);
}

double hinge_loss(TokenIds sentence, std::span<const TokenIds> negatives, const AbaeModel& model,
                  double margin) {
  check_negatives(negatives, model.vocabulary_size());
  const Forward f = forward(sentence, model);
  const double positive = cosine_similarity(f.r, f.z);
  double loss = 0.0;
  for (TokenIds n : negatives) {
    const Vector yn = bag_of_words(n, model.embeddings);
    loss += std::max(0.0, margin - positive + cosine_similarity(f.r, yn));
  }
  return loss;
}

double orthogonality_penalty(const Matrix& aspects) {
  if (aspects.rows() < 1) throw InvalidArgument("orthogonality_penalty: K must be >= 1");
  return frobenius(gram_residual(normalized_rows(aspects, nullptr)));
}

Matrix orthogonality_penalty_gradient(const Matrix& aspects) {
  Vector lengths;
  const Matrix tn = normalized_rows(aspects, &lengths);
  const Matrix residual = gram_residual(tn);
  const double penalty = frobenius(residual);
  Matrix grad(aspects.rows(), aspects.cols(), 0.0);
  if (penalty == 0.0) return grad;
  const std::size_t k = aspects.rows();
  for (std::size_t i = 0; i < k; ++i) {
    // dU/dn_i = 2 (D Tn)_i / U, then project out the radial direction.
    Vector g_n(aspects.cols(), 0.0);
    for (std::size_t j = 0; j < k; ++j) axpy(2.0 * residual(i, j) / penalty, tn.row(j), g_n);
    const double radial = dot(g_n, tn.row(i));
    for (std::size_t c = 0; c < aspects.cols(); ++c) {
      grad(i, c) = (g_n[c] - radial * tn(i, c)) / lengths[i];
    }
  }
  return grad;
}

double abae_objective(std::span<const TrainingExample> batch, const AbaeModel& model,
                      const AbaeConfig& config) {
  double total = 0.0;
  for (const auto& ex : batch) total += hinge_loss(ex.sentence, ex.negatives, model, config.margin);
  if (config.ortho_weight != 0.0) total += config.ortho_weight * orthogonality_penalty(model.aspects);
  return total;
}

AbaeGradients abae_backward(std::span<const TrainingExample> batch, const AbaeModel& model,
                            const AbaeConfig& config) {
  model.validate();
  if (batch.empty()) throw InvalidArgument("abae_backward: empty batch");
  const std::size_t d = model.dimension();
  const std::size_t k = model.num_aspects();
  AbaeGradients g{Matrix(d, d, 0.0), Matrix(k, d, 0.0), Vector(k, 0.0), Matrix(k, d, 0.0), 0.0};

  for (const auto& ex : batch) {
    check_negatives(ex.negatives, model.vocabulary_size());
    const Forward f = forward(ex.sentence, model);
    const double positive = cosine_similarity(f.r, f.z);
    const Vector dpos_dr = cosine_gradient(f.r, f.z);
    const Vector dpos_dz = cosine_gradient(f.z, f.r);

    Vector g_r(d, 0.0);
    Vector g_z(d, 0.0);
    for (TokenIds n : ex.negatives) {
      const Vector yn = bag_of_words(n, model.embeddings);
      const double h = config.margin - positive + cosine_similarity(f.r, yn);
      if (h <= 0.0) continue;
      g.objective += h;
      axpy(-1.0, dpos_dr, g_r);
      axpy(1.0, cosine_gradient(f.r, yn), g_r);
      axpy(-1.0, dpos_dz, g_z);
    }
    if (std::all_of(g_r.begin(), g_r.end(), [](double x) { return x == 0.0; }) &&
        std::all_of(g_z.begin(), g_z.end(), [](double x) { return x == 0.0; })) {
      continue;
    }

    // r = T^T p
    Vector g_p(k);
    for (std::size_t a = 0; a < k; ++a) {
      axpy(f.p[a], g_r, g.aspects.row(a));
      g_p[a] = dot(model.aspects.row(a), g_r);
    }
    // p = softmax(W z + b)
    const Vector g_q = softmax_backward(f.p, g_p);
    for (std::size_t a = 0; a < k; ++a) {
      axpy(g_q[a], f.z, g.classifier.row(a));
      g.bias[a] += g_q[a];
    }
    axpy(1.0, matvec_transposed(model.classifier, g_q), g_z);
    // z = sum_i a_i e_i
    Vector g_a(ex.sentence.size());
    for (std::size_t i = 0; i < ex.sentence.size(); ++i) {
      g_a[i] = dot(embedding_row(model.embeddings, ex.sentence[i]), g_z);
    }
    // a = softmax(l), l_i = e_i^T M y
    const Vector g_l = softmax_backward(f.attention, g_a);
    Vector weighted(d, 0.0);
    for (std::size_t i = 0; i < ex.sentence.size(); ++i) {
      axpy(g_l[i], embedding_row(model.embeddings, ex.sentence[i]), weighted);
    }
    for (std::size_t r = 0; r < d; ++r) axpy(weighted[r], f.y, g.attention.row(r));
  }

  if (config.ortho_weight != 0.0) {
    g.objective += config.ortho_weight * orthogonality_penalty(model.aspects);
    const Matrix gp = orthogonality_penalty_gradient(model.aspects);
    axpy(config.ortho_weight, gp.values(), g.aspects.values());
  }
  return g;
}

AbaeModel initialize_abae(const EmbeddingTable& embeddings, const Matrix& initial_aspects,
                          const AbaeConfig& config) {
  config.validate();
  const std::size_t d = embeddings.dimension();
  const std::size_t k = config.aspects;
  if (initial_aspects.rows() != k) {
    throw InvalidArgument("abae: K mismatch: config has " + std::to_string(k) +
                          " aspects but the initialization has " +
                          std::to_string(initial_aspects.rows()));
  }
  if (initial_aspects.cols() != d) {
    throw InvalidArgument("abae: initial aspects have dimension " +
                          std::to_string(initial_aspects.cols()) + ", embeddings have " +
                          std::to_string(d));
  }
  Rng rng(config.seed);
  AbaeModel model;
  model.embeddings = embeddings.input;
  model.vocabulary_hash = embeddings.vocabulary_hash();
  model.attention = Matrix::identity(d);
  for (double& x : model.attention.values()) {
    x += uniform_real(rng, -config.attention_init_noise, config.attention_init_noise);
  }
  const double range = config.classifier_init_range;
  model.classifier = Matrix(k, d);
  for (double& x : model.classifier.values()) x = uniform_real(rng, -range, range);
  model.bias.resize(k);
  for (double& x : model.bias) x = uniform_real(rng, -range, range);
  model.aspects = initial_aspects;
  model.validate();
  return model;
}

AbaeModel train_abae(const EncodedCorpus& corpus, const EmbeddingTable& embeddings,
                     const KMeansModel& init, const AbaeConfig& config,
                     std::vector<double>* epoch_objectives) {
  AbaeModel model = initialize_abae(embeddings, init.centroids, config);
  std::vector<TokenIds> pool;
  for (const auto& s : corpus.sentences()) {
    check_sentence(s.token_ids, model.vocabulary_size());
    pool.emplace_back(s.token_ids);
  }
  if (pool.empty()) throw InvalidArgument("train_abae: empty corpus");

  // The initialization consumed the first draws of a generator seeded the
  // same way; offset the training stream so the two are independent.
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  AdamState adam({config.learning_rate, 0.9, 0.999, 1e-8},
                 {model.attention.size(), model.classifier.size(), model.bias.size(),
                  model.aspects.size()});
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  if (epoch_objectives) epoch_objectives->clear();
  std::vector<TrainingExample> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        TrainingExample ex{pool[order[i]], {}};
        ex.negatives.reserve(config.negatives);
        for (std::size_t n = 0; n < config.negatives; ++n) {
          ex.negatives.push_back(pool[uniform_index(rng, pool.size())]);
        }
        batch.push_back(std::move(ex));
      }
      const AbaeGradients grads = abae_backward(batch, model, config);
      epoch_total += grads.objective;
      const std::array<std::span<double>, 4> params{model.attention.values(),
                                                    model.classifier.values(), model.bias,
                                                    model.aspects.values()};
      const std::array<std::span<const double>, 4> grad_spans{
          grads.attention.values(), grads.classifier.values(), grads.bias,
          grads.aspects.values()};
      adam.step(params, grad_spans);
    }
    if (epoch_objectives) {
      epoch_objectives->push_back(epoch_total / static_cast<double>(pool.size()));
    }
  }
  model.validate();
  return model;
}

SentenceInference infer_sentence(TokenIds sentence, const AbaeModel& model) {
  Forward f = forward(sentence, model);
  return {AspectDistribution(std::move(f.p)), std::move(f.z)};
}

namespace {

constexpr char kMagic[8] = {'A', 'B', 'A', 'E', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.put(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T read_le(std::istream& in) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == EOF) throw FormatError("checkpoint: truncated header");
    value |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(value);
}

void write_floats(std::ostream& out, std::span<const double> values) {
  for (double x : values) write_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
}

void read_floats(std::istream& in, std::span<double> values, const char* what) {
  for (double& x : values) {
    std::uint32_t bits = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const int c = in.get();
      if (c == EOF) throw FormatError(std::string("checkpoint: truncated ") + what);
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    x = static_cast<double>(std::bit_cast<float>(bits));
  }
}

}  // namespace

void save_checkpoint(std::ostream& out, const AbaeModel& model) {
  model.validate();
  out.write(kMagic, sizeof kMagic);
  write_le<std::uint32_t>(out, kVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.num_aspects()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.dimension()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.vocabulary_size()));
  write_le<std::uint64_t>(out, model.vocabulary_hash);
  write_floats(out, model.attention.values());
  write_floats(out, model.classifier.values());
  write_floats(out, model.bias);
  write_floats(out, model.aspects.values());
  if (!out) throw IoError("checkpoint: write failed");
}

AbaeModel load_checkpoint(std::istream& in, const EmbeddingTable& embeddings) {
  char magic[8] = {};
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw FormatError("checkpoint: bad magic");
  }
  const auto version = read_le<std::uint32_t>(in);
  if (version != kVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::size_t k = read_le<std::uint32_t>(in);
  const std::size_t d = read_le<std::uint32_t>(in);
  const std::size_t v = read_le<std::uint32_t>(in);
  const auto hash = read_le<std::uint64_t>(in);
  if (v != embeddings.size() || d != embeddings.dimension()) {
    throw FormatError("checkpoint: shape (V=" + std::to_string(v) + ", d=" + std::to_string(d) +
                      ") does not match the embedding table (V=" +
                      std::to_string(embeddings.size()) +
                      ", d=" + std::to_string(embeddings.dimension()) + ")");
  }
  if (hash != embeddings.vocabulary_hash()) {
    throw FormatError("checkpoint: vocabulary hash mismatch");
  }
  AbaeModel model;
  model.embeddings = embeddings.input;
  model.vocabulary_hash = hash;
  model.attention = Matrix(d, d);
  model.classifier = Matrix(k, d);
  model.bias.assign(k, 0.0);
  model.aspects = Matrix(k, d);
  read_floats(in, model.attention.values(), "attention matrix");
  read_floats(in, model.classifier.values(), "classifier");
  read_floats(in, model.bias, "bias");
  read_floats(in, model.aspects.values(), "aspect matrix");
  model.validate();
  return model;
}

}  // namespace abae
