#include "tuef/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tuef {

namespace {

using nlohmann::json;

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

std::string trim_lower(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::int64_t> json_int(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (it->is_string()) {
    const auto& s = it->get_ref<const std::string&>();
    if (s.empty()) return std::nullopt;
    std::size_t pos = 0;
    const auto v = std::stoll(s, &pos);
    if (pos != s.size()) throw Error("non-integer field " + std::string(key));
    return v;
  }
  throw Error("non-integer field " + std::string(key));
}

Timestamp json_ts(const json& j) {
  auto it = j.find("creation_ts");
  if (it == j.end()) throw Error("missing creation_ts");
  if (it->is_number()) return static_cast<Timestamp>(std::llround(it->get<double>()));
  return parse_timestamp(it->get<std::string>());
}

RawPost raw_from_json(const json& j) {
  RawPost p;
  auto id = json_int(j, "id");
  if (!id) throw Error("missing id");
  p.id = *id;
  const auto kind = j.at("post_kind").get<std::string>();
  if (kind == "question") {
    p.kind = PostKind::kQuestion;
  } else if (kind == "answer") {
    p.kind = PostKind::kAnswer;
  } else {
    throw Error("unknown post_kind " + kind);
  }
  p.owner_user_id = json_int(j, "owner_user_id");
  p.creation_ts = json_ts(j);
  if (auto it = j.find("title"); it != j.end() && it->is_string()) p.title = it->get<std::string>();
  if (auto it = j.find("body"); it != j.end() && it->is_string()) p.body = it->get<std::string>();
  if (auto it = j.find("tags"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      p.tags = decode_dump_tags(it->get<std::string>());
    } else {
      for (const auto& t : *it) {
        auto tag = trim_lower(t.get<std::string>());
        if (!tag.empty()) p.tags.push_back(std::move(tag));
      }
    }
  }
  p.accepted_answer_id = json_int(j, "accepted_answer_id");
  p.parent_id = json_int(j, "parent_id");
  return p;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const auto ent = s.substr(i + 1, semi - i - 1);
    if (ent == "lt") {
      out.push_back('<');
    } else if (ent == "gt") {
      out.push_back('>');
    } else if (ent == "amp") {
      out.push_back('&');
    } else if (ent == "quot") {
      out.push_back('"');
    } else if (ent == "apos") {
      out.push_back('\'');
    } else if (!ent.empty() && ent[0] == '#') {
      const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
      const std::string digits(ent.substr(hex ? 2 : 1));
      unsigned long cp = 0;
      try {
        cp = std::stoul(digits, nullptr, hex ? 16 : 10);
      } catch (const std::exception&) {
        out.push_back('&');
        continue;
      }
      // UTF-8 encode.
      if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
      } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      }
    } else {
      out.push_back('&');
      continue;
    }
    i = semi;
  }
  return out;
}

// Attributes of one <row .../> element. Returns false when the element is malformed.
bool parse_row_attributes(std::string_view line, std::map<std::string, std::string>& attrs) {
  const auto start = line.find("<row");
  if (start == std::string_view::npos) return false;
  std::size_t i = start + 4;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) return false;
    if (line[i] == '/' || line[i] == '>') return true;
    const auto eq = line.find('=', i);
    if (eq == std::string_view::npos) return false;
    std::string name(line.substr(i, eq - i));
    if (eq + 1 >= line.size()) return false;
    const char quote = line[eq + 1];
    if (quote != '"' && quote != '\'') return false;
    const auto close = line.find(quote, eq + 2);
    if (close == std::string_view::npos) return false;
    attrs[std::move(name)] = decode_entities(line.substr(eq + 2, close - eq - 2));
    i = close + 1;
  }
  return false;
}

}  // namespace

Timestamp parse_timestamp(const std::string& text) {
  int y = 0;
  unsigned mo = 0;
  unsigned d = 0;
  unsigned h = 0;
  unsigned mi = 0;
  unsigned s = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u%n", &y, &mo, &d, &consumed) != 3) {
    throw Error("bad timestamp '" + text + "'");
  }
  if (static_cast<std::size_t>(consumed) < text.size() &&
      (text[consumed] == 'T' || text[consumed] == ' ')) {
    if (std::sscanf(text.c_str() + consumed + 1, "%u:%u:%u", &h, &mi, &s) < 2) {
      throw Error("bad timestamp '" + text + "'");
    }
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) {
    throw Error("bad timestamp '" + text + "'");
  }
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_timestamp(Timestamp ts) {
  std::int64_t days = ts >= 0 ? ts / 86400 : (ts - 86399) / 86400;
  std::int64_t secs = ts - days * 86400;
  std::int64_t y = 0;
  unsigned m = 0;
  unsigned d = 0;
  civil_from_days(days, y, m, d);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

std::vector<std::string> decode_dump_tags(const std::string& field) {
  std::vector<std::string> tags;
  std::string cur;
  auto flush = [&] {
    auto t = trim_lower(cur);
    if (!t.empty()) tags.push_back(std::move(t));
    cur.clear();
  };
  for (char c : field) {
    if (c == '<' || c == '>' || c == '|') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return tags;
}

std::vector<RawPost> parse_posts_jsonl(std::istream& in, ParseReport* report) {
  std::vector<RawPost> posts;
  ParseReport local;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++local.records;
    try {
      posts.push_back(raw_from_json(json::parse(line)));
    } catch (const std::exception&) {
      ++local.skipped;
    }
  }
  if (report) *report = local;
  return posts;
}

std::vector<RawPost> parse_posts_xml(std::istream& in, ParseReport* report) {
  std::vector<RawPost> posts;
  ParseReport local;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("<row") == std::string::npos) continue;
    ++local.records;
    std::map<std::string, std::string> a;
    if (!parse_row_attributes(line, a)) {
      ++local.skipped;
      continue;
    }
    try {
      RawPost p;
      auto id = a.find("Id");
      if (id == a.end() || id->second.empty()) throw Error("missing Id");
      p.id = std::stoll(id->second);
      const auto type = a.count("PostTypeId") ? a["PostTypeId"] : std::string();
      if (type == "1") {
        p.kind = PostKind::kQuestion;
      } else if (type == "2") {
        p.kind = PostKind::kAnswer;
      } else {
        // Wiki, tag-excerpt and other post types are not part of the corpus.
        --local.records;
        continue;
      }
      if (auto it = a.find("OwnerUserId"); it != a.end() && !it->second.empty()) {
        p.owner_user_id = std::stoll(it->second);
      }
      p.creation_ts = parse_timestamp(a.at("CreationDate"));
      if (auto it = a.find("Title"); it != a.end()) p.title = it->second;
      if (auto it = a.find("Body"); it != a.end()) p.body = it->second;
      if (auto it = a.find("Tags"); it != a.end()) p.tags = decode_dump_tags(it->second);
      if (auto it = a.find("AcceptedAnswerId"); it != a.end() && !it->second.empty()) {
        p.accepted_answer_id = std::stoll(it->second);
      }
      if (auto it = a.find("ParentId"); it != a.end() && !it->second.empty()) {
        p.parent_id = std::stoll(it->second);
      }
      posts.push_back(std::move(p));
    } catch (const std::exception&) {
      ++local.skipped;
    }
  }
  if (report) *report = local;
  return posts;
}

std::vector<RawPost> parse_posts(const std::filesystem::path& path, DumpFormat format, ParseReport* report) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read posts file " + path.string());
  return format == DumpFormat::kJsonl ? parse_posts_jsonl(in, report) : parse_posts_xml(in, report);
}

std::map<UserId, std::int64_t> parse_reputation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read users file " + path.string());
  std::map<UserId, std::int64_t> rep;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      auto id = json_int(j, "id");
      if (!id) continue;
      rep[*id] = json_int(j, "reputation").value_or(0);
    } catch (const std::exception&) {
      continue;
    }
  }
  return rep;
}

void recompute_user_stats(Dataset& ds) {
  std::map<UserId, UserStats> users;
  for (const auto& [uid, st] : ds.users) users[uid].reputation = st.reputation;
  for (const auto& [qid, q] : ds.questions) users[q.asker];
  for (const auto& [aid, a] : ds.answers) {
    auto& st = users[a.owner];
    ++st.answers;
    if (ds.questions.at(a.parent_id).accepted_answer_id == aid) ++st.accepted;
  }
  // Users that no longer author any retained post are dropped.
  std::set<UserId> active;
  for (const auto& [qid, q] : ds.questions) active.insert(q.asker);
  for (const auto& [aid, a] : ds.answers) active.insert(a.owner);
  std::erase_if(users, [&](const auto& kv) { return !active.count(kv.first); });
  ds.users = std::move(users);
  ds.tag_universe.clear();
  for (const auto& [qid, q] : ds.questions) ds.tag_universe.insert(q.tags.begin(), q.tags.end());
}

Dataset clean(const std::vector<RawPost>& raw, const std::map<UserId, std::int64_t>& reputation,
              CleanReport* report) {
  CleanReport rep;
  std::map<PostId, const RawPost*> questions;
  std::map<PostId, const RawPost*> answers;
  for (const auto& p : raw) {
    if (!p.owner_user_id) {
      ++rep.dropped_no_owner;
      continue;
    }
    if (p.kind == PostKind::kQuestion) {
      if (!p.accepted_answer_id) {
        ++rep.dropped_no_accepted;
        continue;
      }
      if (p.tags.empty()) {
        ++rep.dropped_no_tags;
        continue;
      }
      questions.emplace(p.id, &p);
    } else {
      if (!p.parent_id) {
        ++rep.dropped_orphan_answers;
        continue;
      }
      answers.emplace(p.id, &p);
    }
  }

  Dataset ds;
  for (const auto& [qid, p] : questions) {
    auto acc = answers.find(*p->accepted_answer_id);
    if (acc == answers.end() || *acc->second->parent_id != qid) {
      ++rep.dropped_missing_accepted;
      continue;
    }
    if (*acc->second->owner_user_id == *p->owner_user_id) {
      ++rep.dropped_self_answered;
      continue;
    }
    Question q;
    q.id = qid;
    q.asker = *p->owner_user_id;
    q.creation_ts = p->creation_ts;
    q.title = p->title.value_or("");
    q.body = p->body;
    // Duplicate tags within a question carry no extra information.
    for (const auto& t : p->tags) {
      if (std::find(q.tags.begin(), q.tags.end(), t) == q.tags.end()) q.tags.push_back(t);
    }
    q.accepted_answer_id = *p->accepted_answer_id;
    ds.questions.emplace(qid, std::move(q));
  }
  for (const auto& [aid, p] : answers) {
    if (!ds.questions.count(*p->parent_id)) {
      ++rep.dropped_orphan_answers;
      continue;
    }
    ds.answers.emplace(aid, Answer{aid, *p->owner_user_id, p->creation_ts, *p->parent_id, p->body});
  }
  for (const auto& [uid, r] : reputation) ds.users[uid].reputation = r;
  recompute_user_stats(ds);
  if (report) *report = rep;
  return ds;
}

std::vector<RawPost> to_raw(const Dataset& ds) {
  std::vector<RawPost> out;
  out.reserve(ds.questions.size() + ds.answers.size());
  for (const auto& [qid, q] : ds.questions) {
    RawPost p;
    p.id = qid;
    p.kind = PostKind::kQuestion;
    p.owner_user_id = q.asker;
    p.creation_ts = q.creation_ts;
    p.title = q.title;
    p.body = q.body;
    p.tags = q.tags;
    p.accepted_answer_id = q.accepted_answer_id;
    out.push_back(std::move(p));
  }
  for (const auto& [aid, a] : ds.answers) {
    RawPost p;
    p.id = aid;
    p.kind = PostKind::kAnswer;
    p.owner_user_id = a.owner;
    p.creation_ts = a.creation_ts;
    p.body = a.body;
    p.parent_id = a.parent_id;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<const Question*> chronological(const Dataset& ds) {
  std::vector<const Question*> order;
  order.reserve(ds.questions.size());
  for (const auto& [qid, q] : ds.questions) order.push_back(&q);
  std::sort(order.begin(), order.end(), [](const Question* a, const Question* b) {
    return a->creation_ts != b->creation_ts ? a->creation_ts < b->creation_ts : a->id < b->id;
  });
  return order;
}

SplitDataset temporal_split(const Dataset& ds, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split ratio must lie in (0,1)");
  const auto order = chronological(ds);
  const auto n = order.size();
  const auto n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));

  SplitDataset split;
  for (std::size_t i = 0; i < n; ++i) {
    auto& part = i < n_train ? split.train : split.test;
    part.questions.emplace(order[i]->id, *order[i]);
  }
  for (const auto& [aid, a] : ds.answers) {
    auto& part = split.train.questions.count(a.parent_id) ? split.train : split.test;
    part.answers.emplace(aid, a);
  }
  for (auto* part : {&split.train, &split.test}) {
    for (const auto& [uid, st] : ds.users) {
      if (st.reputation != 0) part->users[uid].reputation = st.reputation;
    }
    recompute_user_stats(*part);
  }
  if (n_train < n) {
    split.split_ts = order[n_train]->creation_ts;
  } else if (n > 0) {
    split.split_ts = order[n - 1]->creation_ts + 1;
  }
  return split;
}

}  // namespace tuef
