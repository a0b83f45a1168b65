#include "tuef/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include "json.hpp"

namespace tuef {

void SyntheticSpec::validate() const {
  if (experts < 0 || experts > users) throw Error("experts must not exceed users");
  if (topics < 1 || topics > tags) throw Error("topics must not exceed tags");
  if (questions < 0) throw Error("question count must be non-negative");
  if (noise_answers_min < 0 || noise_answers_max < noise_answers_min) throw Error("bad noise answer range");
  if (active_users < 0 || experts + active_users > users) throw Error("active users do not fit in the user pool");
}

namespace {

std::string tag_name(int topic, int j) {
  return j == 0 ? "topic" + std::to_string(topic) : "topic" + std::to_string(topic) + "-sub" + std::to_string(j);
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

  SyntheticCorpus out;
  // Tags: topic t gets an equal share; index 0 of each share is the broad head tag.
  std::vector<std::vector<std::string>> topic_tags(spec.topics);
  for (int i = 0; i < spec.tags; ++i) {
    const int t = i % spec.topics;
    topic_tags[t].push_back(tag_name(t, static_cast<int>(topic_tags[t].size())));
  }
  for (int t = 0; t < spec.topics; ++t) {
    for (const auto& tag : topic_tags[t]) out.truth.tag_topic[tag] = t;
  }

  // Experts: users 1..experts, round-robin over topics; specific tags dealt among a topic's experts.
  std::vector<std::vector<int>> topic_experts(spec.topics);
  for (int e = 0; e < spec.experts; ++e) {
    PlantedExpert pe;
    pe.user = e + 1;
    pe.primary_topic = e % spec.topics;
    pe.topic_affinity.assign(spec.topics, spec.topics > 1 ? (1.0 - spec.affinity_concentration) / (spec.topics - 1) : 0.0);
    pe.topic_affinity[pe.primary_topic] = spec.topics > 1 ? spec.affinity_concentration : 1.0;
    topic_experts[pe.primary_topic].push_back(e);
    out.truth.experts.push_back(std::move(pe));
  }
  std::map<std::string, int> tag_owner;
  for (int t = 0; t < spec.topics; ++t) {
    const auto& ex = topic_experts[t];
    if (ex.empty()) continue;
    for (std::size_t j = 1; j < topic_tags[t].size(); ++j) {
      const int e = ex[(j - 1) % ex.size()];
      tag_owner[topic_tags[t][j]] = e;
      out.truth.experts[e].owned_tags.push_back(topic_tags[t][j]);
    }
    if (topic_tags[t].size() == 1) {
      tag_owner[topic_tags[t][0]] = ex[0];
      out.truth.experts[ex[0]].owned_tags.push_back(topic_tags[t][0]);
    }
  }
  const UserId first_active = spec.experts + 1;
  const UserId first_casual = spec.experts + spec.active_users + 1;
  const int casual = spec.users - spec.experts - spec.active_users;

  // Vocabulary: shared filler words, topic words, and a few words per tag.
  auto word = [](const std::string& prefix, int i) { return prefix + std::to_string(i); };

  PostId next_id = 1;
  Timestamp ts = spec.start_ts;
  for (int qi = 0; qi < spec.questions; ++qi) {
    const int topic = pick(spec.topics);
    const auto& tt = topic_tags[topic];
    std::vector<std::string> tags = {tt[0]};
    const int n_specific = tt.size() > 1 ? 1 + pick(2) : 0;
    for (int s = 0; s < n_specific; ++s) {
      // Zipf-like preference for low-index specific tags.
      const double r = uniform(0.0, 1.0);
      const int j = 1 + static_cast<int>(std::pow(r, 1.6) * static_cast<double>(tt.size() - 1));
      const auto& tag = tt[std::min<std::size_t>(j, tt.size() - 1)];
      if (std::find(tags.begin(), tags.end(), tag) == tags.end()) tags.push_back(tag);
    }
    const std::string& focus = tags.size() > 1 ? tags[1] : tags[0];

    std::string title;
    std::string body = "<p>";
    for (int w = 0; w < 3; ++w) title += (w ? " " : "") + focus + "w" + std::to_string(pick(4));
    title += " " + word("topic" + std::to_string(topic) + "word", pick(30));
    for (int w = 0; w < 12; ++w) {
      const double r = uniform(0.0, 1.0);
      std::string tok;
      if (r < 0.4) {
        tok = word("common", pick(60));
      } else if (r < 0.75) {
        tok = word("topic" + std::to_string(topic) + "word", pick(30));
      } else {
        const auto& tag = tags[pick(static_cast<int>(tags.size()))];
        tok = tag + "w" + std::to_string(pick(4));
      }
      body += (w ? " " : "") + tok;
    }
    body += "</p><pre><code>" + focus + "_call()</code></pre>";

    // Answerers and their acceptance weights.
    std::vector<std::pair<UserId, double>> answerers;
    auto add = [&](UserId u, double w) {
      for (const auto& [v, x] : answerers) {
        if (v == u) return;
      }
      answerers.emplace_back(u, w);
    };
    const auto owner_it = tag_owner.find(focus);
    if (owner_it != tag_owner.end() && uniform(0.0, 1.0) < spec.owner_answer_prob) {
      add(owner_it->second + 1, 8.0 * out.truth.experts[owner_it->second].topic_affinity[topic]);
    }
    const auto& peers = topic_experts[topic];
    if (!peers.empty() && uniform(0.0, 1.0) < spec.peer_answer_prob) {
      const int e = peers[pick(static_cast<int>(peers.size()))];
      add(e + 1, 2.0 * out.truth.experts[e].topic_affinity[topic]);
    }
    if (spec.experts > 0 && uniform(0.0, 1.0) < 0.1) {
      const int e = pick(spec.experts);
      add(e + 1, 2.0 * out.truth.experts[e].topic_affinity[topic]);
    }
    const int noise = spec.noise_answers_min + pick(spec.noise_answers_max - spec.noise_answers_min + 1);
    for (int k = 0; k < noise; ++k) {
      if (spec.active_users > 0 && (casual == 0 || uniform(0.0, 1.0) < 0.7)) {
        add(first_active + pick(spec.active_users), 0.35);
      } else if (casual > 0) {
        add(first_casual + pick(casual), 0.25);
      }
    }
    if (answerers.empty()) {
      // Every question gets at least one answer.
      if (spec.experts > 0) {
        const int e = peers.empty() ? pick(spec.experts) : peers[pick(static_cast<int>(peers.size()))];
        add(e + 1, 1.0);
      } else {
        add(first_casual + pick(std::max(casual, 1)), 1.0);
      }
    }

    // Askers are casual users when any exist, never one of the answerers.
    UserId asker = 0;
    for (int attempt = 0; attempt < 64 && asker == 0; ++attempt) {
      const UserId cand = casual > 0 ? first_casual + pick(casual) : 1 + pick(spec.users);
      if (std::none_of(answerers.begin(), answerers.end(), [&](const auto& a) { return a.first == cand; })) asker = cand;
    }
    if (asker == 0) continue;

    double total = 0.0;
    for (const auto& [u, w] : answerers) total += w;
    double r = uniform(0.0, total);
    std::size_t winner = answerers.size() - 1;
    for (std::size_t i = 0; i < answerers.size(); ++i) {
      r -= answerers[i].second;
      if (r < 0.0) {
        winner = i;
        break;
      }
    }

    RawPost q;
    q.id = next_id++;
    q.kind = PostKind::kQuestion;
    q.owner_user_id = asker;
    q.creation_ts = ts;
    q.title = title;
    q.body = body;
    q.tags = tags;
    const PostId first_answer = next_id;
    q.accepted_answer_id = first_answer + static_cast<PostId>(winner);
    out.posts.push_back(q);
    for (std::size_t i = 0; i < answerers.size(); ++i) {
      RawPost a;
      a.id = next_id++;
      a.kind = PostKind::kAnswer;
      a.owner_user_id = answerers[i].first;
      a.creation_ts = ts + 600 * static_cast<Timestamp>(i + 1) + pick(300);
      a.body = "<p>" + focus + "w" + std::to_string(pick(4)) + " " + word("common", pick(60)) + "</p>";
      a.parent_id = q.id;
      out.posts.push_back(std::move(a));
    }
    ts += 1800 + pick(3600);
  }
  return out;
}

void write_posts_jsonl(const std::vector<RawPost>& posts, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& p : posts) {
    nlohmann::json j;
    j["id"] = p.id;
    j["post_kind"] = p.kind == PostKind::kQuestion ? "question" : "answer";
    if (p.owner_user_id) j["owner_user_id"] = *p.owner_user_id;
    j["creation_ts"] = format_timestamp(p.creation_ts);
    if (p.title) j["title"] = *p.title;
    j["body"] = p.body;
    if (p.kind == PostKind::kQuestion) j["tags"] = p.tags;
    if (p.accepted_answer_id) j["accepted_answer_id"] = *p.accepted_answer_id;
    if (p.parent_id) j["parent_id"] = *p.parent_id;
    out << j.dump() << '\n';
  }
}

void write_truth_json(const SyntheticTruth& truth, const std::filesystem::path& path) {
  nlohmann::json j;
  j["tag_topic"] = truth.tag_topic;
  j["experts"] = nlohmann::json::array();
  for (const auto& e : truth.experts) {
    j["experts"].push_back({{"user", e.user},
                            {"primary_topic", e.primary_topic},
                            {"topic_affinity", e.topic_affinity},
                            {"owned_tags", e.owned_tags}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

}  // namespace tuef
