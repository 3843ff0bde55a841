#pragma once

// Small datasets and model configurations shared by the tests.

#include <string>
#include <vector>

#include "jmt/data_io.hpp"
#include "jmt/model.hpp"
#include "jmt/trainer.hpp"

namespace fixture {

inline const char* kTokens =
    "the\tDT\tB-NP\t2\tnmod\n"
    "dog\tNN\tE-NP\t3\targ\n"
    "sees\tVB\tS-VP\t0\troot\n"
    "a\tDT\tB-NP\t5\tnmod\n"
    "cat\tNN\tE-NP\t3\targ\n"
    "\n"
    "a\tDT\tB-NP\t3\tnmod\n"
    "big\tJJ\tI-NP\t3\tnmod\n"
    "man\tNN\tE-NP\t4\targ\n"
    "runs\tVB\tS-VP\t0\troot\n"
    ".\t.\tO\t4\tpunct\n"
    "\n";

inline const char* kPairs =
    "1\tthe dog sees a cat\tthe dog sees a cat\t5.0\tENTAILMENT\n"
    "2\ta big man runs\ta man runs\t4.5\tENTAILMENT\n"
    "3\tthe dog sees a cat\tthe dog likes a cat\t3.0\tCONTRADICTION\n"
    "4\ta big man runs\tthe cat sees a dog\t1.5\tNEUTRAL\n";

inline jmt::TrainingData data() {
  jmt::TrainingData d;
  d.pos = jmt::parse_token_text(kTokens);
  d.chunk = d.pos;
  d.dep = d.pos;
  d.pairs = jmt::parse_pair_text(kPairs);
  return d;
}

inline jmt::ModelConfig tiny_config(std::size_t width = 3) {
  jmt::ModelConfig c;
  c.embed_dim = width;
  c.hidden = width;
  c.label_dim = width;
  c.classifier_hidden = width;
  c.semantic_hidden = width;
  c.maxout_pool = 2;
  return c;
}

// Model with random parameters everywhere, including the layers that the
// standard initialization sets to zero, so gradient checks exercise every
// path.
inline jmt::JointModel random_model(const jmt::ModelConfig& config, const jmt::TrainingData& d, std::uint64_t seed,
                                    double scale = 0.5) {
  jmt::JointModel m = jmt::make_model(config, d);
  jmt::Rng rng(seed);
  for (jmt::Parameter* p : m.params().all()) {
    for (double& v : p->value().values) v = rng.uniform(-scale, scale);
  }
  return m;
}

}  // namespace fixture
