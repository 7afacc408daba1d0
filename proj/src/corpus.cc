// crs/corpus.cc

// Copyright 2026  The CRS Trainer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crs/corpus.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "crs/error.h"
#include "crs/rng.h"
#include "json.hpp"

namespace crs {

using nlohmann::json;

bool operator==(const Utterance& a, const Utterance& b) {
  return a.labels == b.labels && a.features.rows() == b.features.rows() &&
         a.features.cols() == b.features.cols() &&
         (a.features.array() == b.features.array()).all();
}

bool operator==(const Corpus& a, const Corpus& b) {
  return a.meta == b.meta && a.utterances == b.utterances;
}

bool operator==(const CorpusSet& a, const CorpusSet& b) {
  return a.corpora == b.corpora && a.target_index == b.target_index &&
         a.data_seed == b.data_seed;
}

std::size_t CorpusSet::index_of(const std::string& corpus_id) const {
  for (std::size_t i = 0; i < corpora.size(); ++i) {
    if (corpora[i].meta.corpus_id == corpus_id) return i;
  }
  throw ValidationError("unknown corpus_id: " + corpus_id);
}

int CorpusSet::feature_dim() const {
  for (const Corpus& c : corpora) {
    if (!c.utterances.empty()) {
      return static_cast<int>(c.utterances.front().features.cols());
    }
  }
  throw ValidationError("corpus set has no utterances");
}

// --- Spec validation --------------------------------------------------------

namespace {

const LanguageSpec& find_language(const SyntheticSpec& spec,
                                  const std::string& id,
                                  const std::string& corpus_id) {
  for (const LanguageSpec& l : spec.languages) {
    if (l.language_id == id) return l;
  }
  throw ValidationError("corpus '" + corpus_id +
                        "' references undefined language_id '" + id + "'");
}

const DomainSpec& find_domain(const SyntheticSpec& spec, const std::string& id,
                              const std::string& corpus_id) {
  for (const DomainSpec& d : spec.domains) {
    if (d.domain_id == id) return d;
  }
  throw ValidationError("corpus '" + corpus_id +
                        "' references undefined domain_id '" + id + "'");
}

std::vector<std::string> language_alphabet(const LanguageSpec& lang) {
  std::vector<std::string> alphabet;
  alphabet.reserve(static_cast<std::size_t>(lang.transition.rows()));
  for (Eigen::Index j = 0; j < lang.transition.rows(); ++j) {
    alphabet.push_back(lang.language_id + ":p" + std::to_string(j));
  }
  return alphabet;
}

}  // namespace

void validate_spec(const SyntheticSpec& spec) {
  if (spec.feature_dim < 1) {
    throw ValidationError("feature_dim must be >= 1");
  }
  if (spec.languages.empty()) throw ValidationError("languages is empty");
  if (spec.domains.empty()) throw ValidationError("domains is empty");
  if (spec.corpora.empty()) throw ValidationError("corpora is empty");

  std::set<std::string> seen_lang;
  for (const LanguageSpec& l : spec.languages) {
    if (!seen_lang.insert(l.language_id).second) {
      throw ValidationError("duplicate language_id '" + l.language_id + "'");
    }
    const Eigen::Index a = l.transition.rows();
    if (a < 1 || l.transition.cols() != a) {
      throw ValidationError("language '" + l.language_id +
                            "': transition must be square and nonempty");
    }
    for (Eigen::Index i = 0; i < a; ++i) {
      if ((l.transition.row(i).array() < 0.0).any()) {
        throw ValidationError("language '" + l.language_id + "': transition row " +
                              std::to_string(i) + " has a negative entry");
      }
      const double row_sum = l.transition.row(i).sum();
      if (std::abs(row_sum - 1.0) > 1e-9) {
        throw ValidationError("language '" + l.language_id + "': transition row " +
                              std::to_string(i) + " sums to " +
                              std::to_string(row_sum) + ", expected 1");
      }
    }
    if (l.emission_means.rows() != a ||
        l.emission_means.cols() != spec.feature_dim) {
      throw ValidationError("language '" + l.language_id +
                            "': emission_means must be alphabet x feature_dim");
    }
    if (!l.emission_means.allFinite()) {
      throw ValidationError("language '" + l.language_id +
                            "': emission_means has non-finite entries");
    }
  }

  std::set<std::string> seen_dom;
  for (const DomainSpec& d : spec.domains) {
    if (!seen_dom.insert(d.domain_id).second) {
      throw ValidationError("duplicate domain_id '" + d.domain_id + "'");
    }
    if (d.channel_offset.size() != spec.feature_dim) {
      throw ValidationError("domain '" + d.domain_id +
                            "': channel_offset length != feature_dim");
    }
    if (!d.channel_offset.allFinite()) {
      throw ValidationError("domain '" + d.domain_id +
                            "': channel_offset has non-finite entries");
    }
    if (d.noise_sigma < 0.0) {
      throw ValidationError("domain '" + d.domain_id + "': noise_sigma < 0");
    }
    if (d.min_frames_per_phone < 1 ||
        d.max_frames_per_phone < d.min_frames_per_phone) {
      throw ValidationError("domain '" + d.domain_id +
                            "': invalid frames_per_phone range");
    }
  }

  std::set<std::string> seen_corpus;
  for (const CorpusSpec& c : spec.corpora) {
    if (!seen_corpus.insert(c.corpus_id).second) {
      throw ValidationError("duplicate corpus_id '" + c.corpus_id + "'");
    }
    find_language(spec, c.language_id, c.corpus_id);
    find_domain(spec, c.domain_id, c.corpus_id);
    if (c.min_label_len < 1 || c.max_label_len < c.min_label_len) {
      throw ValidationError("corpus '" + c.corpus_id +
                            "': invalid label length range");
    }
  }
}

// --- Generation -------------------------------------------------------------

CorpusSet generate_corpus_set(const SyntheticSpec& spec) {
  validate_spec(spec);

  CorpusSet set;
  set.data_seed = spec.seed;
  set.target_index = 0;
  set.corpora.reserve(spec.corpora.size());

  for (std::size_t ci = 0; ci < spec.corpora.size(); ++ci) {
    const CorpusSpec& cs = spec.corpora[ci];
    const LanguageSpec& lang = find_language(spec, cs.language_id, cs.corpus_id);
    const DomainSpec& dom = find_domain(spec, cs.domain_id, cs.corpus_id);
    const int alphabet_size = static_cast<int>(lang.transition.rows());

    Corpus corpus;
    corpus.meta.corpus_id = cs.corpus_id;
    corpus.meta.language_id = cs.language_id;
    corpus.meta.domain_id = cs.domain_id;
    corpus.meta.phone_alphabet = language_alphabet(lang);
    corpus.meta.utterance_count = cs.utterance_count;
    corpus.utterances.reserve(cs.utterance_count);

    Rng rng = make_stream(spec.seed, kStreamData, ci);

    for (std::size_t u = 0; u < cs.utterance_count; ++u) {
      const int label_len =
          cs.min_label_len +
          static_cast<int>(next_index(
              rng, static_cast<std::size_t>(cs.max_label_len -
                                            cs.min_label_len + 1)));

      Utterance utt;
      utt.labels.resize(static_cast<std::size_t>(label_len));
      utt.labels[0] = static_cast<int>(
          next_index(rng, static_cast<std::size_t>(alphabet_size)));
      for (int i = 1; i < label_len; ++i) {
        const double draw = next_double(rng);
        double cumulative = 0.0;
        int phone = alphabet_size - 1;
        for (int j = 0; j < alphabet_size; ++j) {
          cumulative += lang.transition(utt.labels[static_cast<std::size_t>(
                                            i - 1)],
                                        j);
          if (draw < cumulative) {
            phone = j;
            break;
          }
        }
        utt.labels[static_cast<std::size_t>(i)] = phone;
      }

      // Durations. A repeated phone needs a separating blank frame, so bump
      // its duration to at least 2; this keeps every utterance CTC-feasible.
      std::vector<int> durations(static_cast<std::size_t>(label_len));
      int frames = 0;
      for (int i = 0; i < label_len; ++i) {
        int d = dom.min_frames_per_phone +
                static_cast<int>(next_index(
                    rng, static_cast<std::size_t>(dom.max_frames_per_phone -
                                                  dom.min_frames_per_phone +
                                                  1)));
        if (i > 0 && utt.labels[static_cast<std::size_t>(i)] ==
                         utt.labels[static_cast<std::size_t>(i - 1)]) {
          d = std::max(d, 2);
        }
        durations[static_cast<std::size_t>(i)] = d;
        frames += d;
      }

      utt.features.resize(frames, spec.feature_dim);
      int t = 0;
      for (int i = 0; i < label_len; ++i) {
        const int phone = utt.labels[static_cast<std::size_t>(i)];
        for (int d = 0; d < durations[static_cast<std::size_t>(i)]; ++d, ++t) {
          for (int f = 0; f < spec.feature_dim; ++f) {
            utt.features(t, f) = lang.emission_means(phone, f) +
                                 dom.channel_offset(f) +
                                 dom.noise_sigma * next_gaussian(rng);
          }
        }
      }
      corpus.utterances.push_back(std::move(utt));
    }
    set.corpora.push_back(std::move(corpus));
  }

  validate_corpus_set(set);
  return set;
}

SyntheticSpec make_grid_spec(const GridSpecOptions& options) {
  if (options.num_languages < 1 || options.num_domains < 1 ||
      options.corpora_per_cell < 1 || options.phones_per_language < 1) {
    throw ValidationError("grid options must be positive");
  }
  const std::size_t total = static_cast<std::size_t>(options.num_languages) *
                            static_cast<std::size_t>(options.num_domains) *
                            static_cast<std::size_t>(options.corpora_per_cell);
  std::vector<std::size_t> counts = options.utterance_counts;
  if (counts.empty()) counts.assign(total, 100);
  if (counts.size() != total) {
    throw ValidationError("utterance_counts must have one entry per corpus");
  }

  SyntheticSpec spec;
  spec.feature_dim = options.feature_dim;
  spec.seed = options.seed;

  Rng rng = make_stream(options.seed, kStreamData, 0xC0FFEEull);

  for (int l = 0; l < options.num_languages; ++l) {
    LanguageSpec lang;
    lang.language_id = "L" + std::to_string(l);
    const int a = options.phones_per_language;
    lang.transition.resize(a, a);
    for (int i = 0; i < a; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < a; ++j) {
        const double w = 0.05 + next_double(rng);
        lang.transition(i, j) = w;
        row_sum += w;
      }
      lang.transition.row(i) /= row_sum;
    }
    lang.emission_means.resize(a, options.feature_dim);
    for (int i = 0; i < a; ++i) {
      for (int f = 0; f < options.feature_dim; ++f) {
        lang.emission_means(i, f) = options.emission_spread * next_gaussian(rng);
      }
    }
    spec.languages.push_back(std::move(lang));
  }

  for (int d = 0; d < options.num_domains; ++d) {
    DomainSpec dom;
    dom.domain_id = "D" + std::to_string(d);
    dom.channel_offset.resize(options.feature_dim);
    for (int f = 0; f < options.feature_dim; ++f) {
      dom.channel_offset(f) = options.offset_scale * next_gaussian(rng);
    }
    dom.noise_sigma = options.noise_sigma;
    dom.min_frames_per_phone = options.min_frames_per_phone;
    dom.max_frames_per_phone = options.max_frames_per_phone;
    spec.domains.push_back(std::move(dom));
  }

  std::size_t k = 0;
  for (int l = 0; l < options.num_languages; ++l) {
    for (int d = 0; d < options.num_domains; ++d) {
      for (int s = 0; s < options.corpora_per_cell; ++s, ++k) {
        CorpusSpec cs;
        cs.corpus_id = "L" + std::to_string(l) + "D" + std::to_string(d) +
                       "c" + std::to_string(s);
        cs.language_id = "L" + std::to_string(l);
        cs.domain_id = "D" + std::to_string(d);
        cs.utterance_count = counts[k];
        cs.min_label_len = options.min_label_len;
        cs.max_label_len = options.max_label_len;
        spec.corpora.push_back(std::move(cs));
      }
    }
  }
  return spec;
}

// --- Set validation ---------------------------------------------------------

void validate_corpus_set(const CorpusSet& set) {
  if (set.corpora.empty()) throw ValidationError("corpus set is empty");
  if (set.target_index >= set.corpora.size()) {
    throw ValidationError("target_index out of range");
  }

  std::set<std::string> ids;
  std::map<std::string, const std::vector<std::string>*> alphabets;
  for (const Corpus& c : set.corpora) {
    if (!ids.insert(c.meta.corpus_id).second) {
      throw ValidationError("duplicate corpus_id '" + c.meta.corpus_id + "'");
    }
    if (c.meta.phone_alphabet.empty()) {
      throw ValidationError("corpus '" + c.meta.corpus_id +
                            "': empty phone_alphabet");
    }
    auto [it, inserted] =
        alphabets.emplace(c.meta.language_id, &c.meta.phone_alphabet);
    if (!inserted && *it->second != c.meta.phone_alphabet) {
      throw ValidationError("corpora sharing language_id '" +
                            c.meta.language_id +
                            "' have different phone alphabets");
    }
    if (c.meta.utterance_count != c.utterances.size()) {
      throw ValidationError("corpus '" + c.meta.corpus_id +
                            "': utterance_count mismatch");
    }
    const int alphabet_size = static_cast<int>(c.meta.phone_alphabet.size());
    for (std::size_t u = 0; u < c.utterances.size(); ++u) {
      const Utterance& utt = c.utterances[u];
      const std::string where =
          "corpus '" + c.meta.corpus_id + "' utterance " + std::to_string(u);
      if (utt.features.rows() < 1) throw ValidationError(where + ": no frames");
      if (utt.labels.empty()) throw ValidationError(where + ": no labels");
      if (!utt.features.allFinite()) {
        throw ValidationError(where + ": non-finite features");
      }
      int dups = 0;
      for (std::size_t i = 0; i < utt.labels.size(); ++i) {
        if (utt.labels[i] < 0 || utt.labels[i] >= alphabet_size) {
          throw ValidationError(where + ": label index out of range");
        }
        if (i > 0 && utt.labels[i] == utt.labels[i - 1]) ++dups;
      }
      if (utt.features.rows() <
          static_cast<Eigen::Index>(utt.labels.size()) + dups) {
        throw ValidationError(where + ": fewer frames than CTC requires");
      }
    }
  }
}

// --- Persistence ------------------------------------------------------------

namespace {

constexpr int kMetaFormatVersion = 1;
constexpr std::uint32_t kRecordFormatVersion = 1;
constexpr char kRecordMagic[4] = {'C', 'R', 'S', 'B'};

json spec_to_json(const SyntheticSpec& spec) {
  json j;
  j["format_version"] = kMetaFormatVersion;
  j["feature_dim"] = spec.feature_dim;
  j["seed"] = spec.seed;
  j["languages"] = json::array();
  for (const LanguageSpec& l : spec.languages) {
    json jl;
    jl["language_id"] = l.language_id;
    jl["transition"] = json::array();
    for (Eigen::Index i = 0; i < l.transition.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < l.transition.cols(); ++c) {
        row.push_back(l.transition(i, c));
      }
      jl["transition"].push_back(std::move(row));
    }
    jl["emission_means"] = json::array();
    for (Eigen::Index i = 0; i < l.emission_means.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < l.emission_means.cols(); ++c) {
        row.push_back(l.emission_means(i, c));
      }
      jl["emission_means"].push_back(std::move(row));
    }
    j["languages"].push_back(std::move(jl));
  }
  j["domains"] = json::array();
  for (const DomainSpec& d : spec.domains) {
    json jd;
    jd["domain_id"] = d.domain_id;
    jd["channel_offset"] = std::vector<double>(
        d.channel_offset.data(), d.channel_offset.data() + d.channel_offset.size());
    jd["noise_sigma"] = d.noise_sigma;
    jd["min_frames_per_phone"] = d.min_frames_per_phone;
    jd["max_frames_per_phone"] = d.max_frames_per_phone;
    j["domains"].push_back(std::move(jd));
  }
  j["corpora"] = json::array();
  for (const CorpusSpec& c : spec.corpora) {
    json jc;
    jc["corpus_id"] = c.corpus_id;
    jc["language_id"] = c.language_id;
    jc["domain_id"] = c.domain_id;
    jc["utterance_count"] = c.utterance_count;
    jc["min_label_len"] = c.min_label_len;
    jc["max_label_len"] = c.max_label_len;
    j["corpora"].push_back(std::move(jc));
  }
  return j;
}

SyntheticSpec spec_from_json(const json& j) {
  SyntheticSpec spec;
  try {
    spec.feature_dim = j.at("feature_dim").get<int>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    for (const json& jl : j.at("languages")) {
      LanguageSpec l;
      l.language_id = jl.at("language_id").get<std::string>();
      const json& tr = jl.at("transition");
      const std::size_t a = tr.size();
      l.transition.resize(static_cast<Eigen::Index>(a),
                          static_cast<Eigen::Index>(a));
      for (std::size_t i = 0; i < a; ++i) {
        const json& row = tr.at(i);
        if (row.size() != a) {
          throw ValidationError("language '" + l.language_id +
                                "': transition is not square");
        }
        for (std::size_t c = 0; c < a; ++c) {
          l.transition(static_cast<Eigen::Index>(i),
                       static_cast<Eigen::Index>(c)) = row.at(c).get<double>();
        }
      }
      const json& em = jl.at("emission_means");
      if (em.size() != a) {
        throw ValidationError("language '" + l.language_id +
                              "': emission_means rows != alphabet size");
      }
      l.emission_means.resize(static_cast<Eigen::Index>(a), spec.feature_dim);
      for (std::size_t i = 0; i < a; ++i) {
        const json& row = em.at(i);
        if (static_cast<int>(row.size()) != spec.feature_dim) {
          throw ValidationError("language '" + l.language_id +
                                "': emission_means cols != feature_dim");
        }
        for (int c = 0; c < spec.feature_dim; ++c) {
          l.emission_means(static_cast<Eigen::Index>(i), c) =
              row.at(static_cast<std::size_t>(c)).get<double>();
        }
      }
      spec.languages.push_back(std::move(l));
    }
    for (const json& jd : j.at("domains")) {
      DomainSpec d;
      d.domain_id = jd.at("domain_id").get<std::string>();
      const auto offset = jd.at("channel_offset").get<std::vector<double>>();
      d.channel_offset =
          Eigen::Map<const Eigen::VectorXd>(offset.data(),
                                            static_cast<Eigen::Index>(offset.size()));
      d.noise_sigma = jd.at("noise_sigma").get<double>();
      d.min_frames_per_phone = jd.at("min_frames_per_phone").get<int>();
      d.max_frames_per_phone = jd.at("max_frames_per_phone").get<int>();
      spec.domains.push_back(std::move(d));
    }
    for (const json& jc : j.at("corpora")) {
      CorpusSpec c;
      c.corpus_id = jc.at("corpus_id").get<std::string>();
      c.language_id = jc.at("language_id").get<std::string>();
      c.domain_id = jc.at("domain_id").get<std::string>();
      c.utterance_count = jc.at("utterance_count").get<std::size_t>();
      c.min_label_len = jc.at("min_label_len").get<int>();
      c.max_label_len = jc.at("max_label_len").get<int>();
      spec.corpora.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed spec: ") + e.what());
  }
  return spec;
}

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in, const std::string& context) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError("unexpected end of file while reading " + context);
  return v;
}

std::string record_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "corpus_%03zu.bin", index);
  return buf;
}

}  // namespace

void save_corpus_set(const CorpusSet& set, const std::filesystem::path& dir,
                     const SyntheticSpec* spec_echo) {
  validate_corpus_set(set);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());

  json meta;
  meta["format_version"] = kMetaFormatVersion;
  meta["data_seed"] = set.data_seed;
  meta["target_index"] = set.target_index;
  if (spec_echo != nullptr) meta["spec"] = spec_to_json(*spec_echo);
  meta["corpora"] = json::array();

  for (std::size_t i = 0; i < set.corpora.size(); ++i) {
    const Corpus& c = set.corpora[i];
    const std::string file = record_file_name(i);
    json jc;
    jc["corpus_id"] = c.meta.corpus_id;
    jc["language_id"] = c.meta.language_id;
    jc["domain_id"] = c.meta.domain_id;
    jc["phone_alphabet"] = c.meta.phone_alphabet;
    jc["utterance_count"] = c.meta.utterance_count;
    jc["file"] = file;
    meta["corpora"].push_back(std::move(jc));

    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw IoError("cannot open " + (dir / file).string());
    out.write(kRecordMagic, sizeof(kRecordMagic));
    write_u32(out, kRecordFormatVersion);
    write_u32(out, static_cast<std::uint32_t>(c.utterances.size()));
    for (const Utterance& utt : c.utterances) {
      const std::uint32_t frames =
          static_cast<std::uint32_t>(utt.features.rows());
      const std::uint32_t dim = static_cast<std::uint32_t>(utt.features.cols());
      write_u32(out, frames);
      write_u32(out, dim);
      for (std::uint32_t t = 0; t < frames; ++t) {
        for (std::uint32_t f = 0; f < dim; ++f) {
          const double v = utt.features(t, f);
          out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
      }
      write_u32(out, static_cast<std::uint32_t>(utt.labels.size()));
      for (int label : utt.labels) {
        const std::int32_t v = label;
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
    }
    if (!out) throw IoError("write failure on " + (dir / file).string());
  }

  std::ofstream out(dir / "meta.json");
  if (!out) throw IoError("cannot open " + (dir / "meta.json").string());
  out << meta.dump(2) << "\n";
  if (!out) throw IoError("write failure on " + (dir / "meta.json").string());
}

CorpusSet load_corpus_set(const std::filesystem::path& dir) {
  std::ifstream meta_in(dir / "meta.json");
  if (!meta_in) throw IoError("cannot open " + (dir / "meta.json").string());
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::parse_error& e) {
    throw IoError("malformed meta.json in " + dir.string() + ": " + e.what());
  }

  CorpusSet set;
  try {
    const int version = meta.at("format_version").get<int>();
    if (version != kMetaFormatVersion) {
      throw IoError("meta.json format_version " + std::to_string(version) +
                    " is not supported (expected " +
                    std::to_string(kMetaFormatVersion) + ")");
    }
    set.data_seed = meta.at("data_seed").get<std::uint64_t>();
    set.target_index = meta.at("target_index").get<std::size_t>();

    for (const json& jc : meta.at("corpora")) {
      Corpus c;
      c.meta.corpus_id = jc.at("corpus_id").get<std::string>();
      c.meta.language_id = jc.at("language_id").get<std::string>();
      c.meta.domain_id = jc.at("domain_id").get<std::string>();
      c.meta.phone_alphabet =
          jc.at("phone_alphabet").get<std::vector<std::string>>();
      c.meta.utterance_count = jc.at("utterance_count").get<std::size_t>();
      const std::string file = jc.at("file").get<std::string>();

      std::ifstream in(dir / file, std::ios::binary);
      if (!in) throw IoError("cannot open " + (dir / file).string());
      char magic[4];
      in.read(magic, sizeof(magic));
      if (!in || std::memcmp(magic, kRecordMagic, sizeof(magic)) != 0) {
        throw IoError("bad magic in " + (dir / file).string());
      }
      const std::uint32_t record_version = read_u32(in, "format_version");
      if (record_version != kRecordFormatVersion) {
        throw IoError("record format_version " +
                      std::to_string(record_version) + " in " +
                      (dir / file).string() + " is not supported");
      }
      const std::uint32_t count = read_u32(in, "utterance_count");
      c.utterances.reserve(count);
      for (std::uint32_t u = 0; u < count; ++u) {
        const std::string context =
            "record " + std::to_string(u) + " of " + (dir / file).string();
        const std::uint32_t frames = read_u32(in, context);
        const std::uint32_t dim = read_u32(in, context);
        Utterance utt;
        utt.features.resize(frames, dim);
        for (std::uint32_t t = 0; t < frames; ++t) {
          for (std::uint32_t f = 0; f < dim; ++f) {
            double v = 0.0;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            if (!in) throw IoError("unexpected end of file in " + context);
            utt.features(t, f) = v;
          }
        }
        const std::uint32_t label_len = read_u32(in, context);
        utt.labels.resize(label_len);
        for (std::uint32_t i = 0; i < label_len; ++i) {
          std::int32_t v = 0;
          in.read(reinterpret_cast<char*>(&v), sizeof(v));
          if (!in) throw IoError("unexpected end of file in " + context);
          utt.labels[i] = v;
        }
        c.utterances.push_back(std::move(utt));
      }
      set.corpora.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw IoError("malformed meta.json in " + dir.string() + ": " + e.what());
  }

  validate_corpus_set(set);
  return set;
}

SyntheticSpec load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("malformed spec file " + path.string() + ": " + e.what());
  }
  SyntheticSpec spec = spec_from_json(j);
  validate_spec(spec);
  return spec;
}

void save_spec_file(const SyntheticSpec& spec,
                    const std::filesystem::path& path) {
  validate_spec(spec);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << spec_to_json(spec).dump(2) << "\n";
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace crs
