#include "pprl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace pprl::synth {

namespace {

// Common German given names and surnames, most frequent first. Frequencies
// follow a Zipf-like law over the rank.
constexpr std::array kFirstNames = {
    "Maria",    "Ursula",  "Thomas",   "Michael",  "Andreas", "Monika",   "Petra",    "Stefan",  "Elisabeth",
    "Sabine",   "Peter",   "Wolfgang", "Renate",   "Klaus",   "Helga",    "Juergen",  "Karin",   "Christian",
    "Brigitte", "Frank",   "Ingrid",   "Markus",   "Bernd",   "Erika",    "Uwe",      "Gisela",  "Martin",
    "Claudia",  "Andrea",  "Joerg",    "Susanne",  "Matthias","Gabriele", "Alexander","Christa", "Dieter",
    "Birgit",   "Sebastian","Heike",   "Tobias",   "Anna",    "Lukas",    "Julia",    "Daniel",  "Katharina",
    "Jan",      "Laura",   "Felix",    "Lena",     "Jonas",   "Sophie",   "Leon",     "Hannah",  "Paul",
    "Emma",     "Maximilian","Lea",    "Niklas",   "Marie",   "Tim",      "Johanna",  "Philipp", "Charlotte",
    "Moritz",   "Greta",   "Florian",  "Franziska","Benjamin","Nadine",   "Kevin",    "Jessica", "Dennis",
};

constexpr std::array kSurnames = {
    "Mueller",  "Schmidt",  "Schneider","Fischer",   "Weber",    "Meyer",    "Wagner",   "Becker",   "Schulz",
    "Hoffmann", "Schaefer", "Koch",     "Bauer",     "Richter",  "Klein",    "Wolf",     "Schroeder","Neumann",
    "Schwarz",  "Zimmermann","Braun",   "Krueger",   "Hofmann",  "Hartmann", "Lange",    "Schmitt",  "Werner",
    "Schmitz",  "Krause",   "Meier",    "Lehmann",   "Schmid",   "Schulze",  "Maier",    "Koehler",  "Herrmann",
    "Koenig",   "Walter",   "Mayer",    "Huber",     "Kaiser",   "Fuchs",    "Peters",   "Lang",     "Scholz",
    "Moeller",  "Weiss",    "Jung",     "Hahn",      "Schubert", "Vogel",    "Friedrich","Keller",   "Guenther",
    "Frank",    "Berger",   "Winkler",  "Roth",      "Beck",     "Lorenz",   "Baumann",  "Franke",   "Albrecht",
    "Schuster", "Simon",    "Ludwig",   "Boehm",     "Winter",   "Kraus",    "Martin",   "Schumacher","Kraemer",
    "Vogt",     "Stein",    "Jaeger",   "Otto",      "Sommer",   "Gross",    "Seidel",   "Heinrich", "Brandt",
    "Haas",     "Schreiber","Graf",     "Schulte",   "Dietrich", "Ziegler",  "Kuhn",     "Kuehn",    "Pohl",
};

struct Place {
  const char* city;
  const char* postcode_prefix;  // the remaining digits are drawn per record
};

constexpr std::array<Place, 40> kPlaces = {{
    {"Berlin", "10"},        {"Hamburg", "20"},     {"Muenchen", "80"},   {"Koeln", "50"},
    {"Frankfurt am Main", "60"}, {"Stuttgart", "70"}, {"Duesseldorf", "40"}, {"Leipzig", "04"},
    {"Dortmund", "44"},      {"Essen", "45"},       {"Bremen", "28"},     {"Dresden", "01"},
    {"Hannover", "30"},      {"Nuernberg", "90"},   {"Duisburg", "47"},   {"Bochum", "448"},
    {"Wuppertal", "42"},     {"Bielefeld", "33"},   {"Bonn", "53"},       {"Muenster", "48"},
    {"Mannheim", "68"},      {"Karlsruhe", "76"},   {"Augsburg", "86"},   {"Wiesbaden", "65"},
    {"Kiel", "24"},          {"Aachen", "52"},      {"Freiburg im Breisgau", "79"}, {"Luebeck", "23"},
    {"Erfurt", "99"},        {"Rostock", "18"},     {"Mainz", "55"},      {"Kassel", "34"},
    {"Halle", "06"},         {"Magdeburg", "39"},   {"Saarbruecken", "66"}, {"Potsdam", "14"},
    {"Tuebingen", "72"},     {"Regensburg", "93"},  {"Ulm", "89"},        {"Jena", "07"},
}};

// Phonetic confusions, applied in either direction.
constexpr std::array<std::pair<const char*, const char*>, 16> kPhonetic = {{
    {"ph", "f"}, {"ck", "k"}, {"tz", "z"}, {"ei", "ai"}, {"ie", "i"}, {"th", "t"}, {"dt", "t"}, {"v", "f"},
    {"w", "v"}, {"c", "k"}, {"y", "i"}, {"mm", "m"}, {"nn", "n"}, {"ll", "l"}, {"tt", "t"}, {"ue", "u"},
}};

// QWERTZ rows; neighbours are the horizontally and diagonally adjacent keys.
constexpr std::array<std::string_view, 4> kRows = {"1234567890", "qwertzuiop", "asdfghjkl", "yxcvbnm"};
// Horizontal offset of each row in half-key units.
constexpr std::array<int, 4> kRowShift = {0, 1, 2, 3};

template <std::size_t N>
std::vector<double> zipf_weights(double exponent) {
  std::vector<double> w(N);
  for (std::size_t i = 0; i < N; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), exponent);
  return w;
}

std::size_t pick(Rng& rng, const std::vector<double>& weights) {
  std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
  return d(rng);
}

std::size_t uniform(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

char random_letter(Rng& rng) { return static_cast<char>('a' + uniform(rng, 26)); }
char random_digit(Rng& rng) { return static_cast<char>('0' + uniform(rng, 10)); }

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
char lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }
char match_case(char like, char c) { return is_upper(like) && c >= 'a' && c <= 'z' ? static_cast<char>(c - 'a' + 'A') : c; }

int days_in_month(int year, int month) {
  static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  return month == 2 && leap ? 29 : kDays[static_cast<std::size_t>(month - 1)];
}

// Population-pyramid-like birth year weights: few very old people, a broad
// middle, slightly fewer young people.
constexpr int kFirstYear = 1925;
constexpr int kLastYear = 2010;
const std::vector<double>& year_weights() {
  static const std::vector<double> w = [] {
    std::vector<double> out;
    for (int y = kFirstYear; y <= kLastYear; ++y) {
      const double age = 2024 - y;
      double v = age < 20 ? 0.8 : age < 65 ? 1.0 : std::max(0.05, 1.0 - (age - 65) / 35.0);
      if (y >= 1955 && y <= 1969) v *= 1.3;  // baby boom
      out.push_back(v);
    }
    return out;
  }();
  return w;
}

std::string& field(RawRecord& r, std::size_t i) {
  switch (i) {
    case 0: return r.first_name;
    case 1: return r.last_name;
    case 2: return r.birth_name;
    case 3: return r.city;
    case 4: return r.postcode;
    case 5: return r.birth_year;
    case 6: return r.birth_month;
    default: return r.birth_day;
  }
}

bool numeric_field(std::size_t i) { return i >= 4; }

}  // namespace

void validate(const SyntheticDatasetSpec& s) {
  std::vector<std::string> errors;
  auto prob = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) errors.push_back(std::string(name) + " must lie in [0, 1]");
  };
  prob(s.overlap, "overlap");
  prob(s.corruption, "corruption probability");
  prob(s.birth_name_omission, "birth-name omission rate");
  prob(s.shuffle_rate, "shuffle rate");
  if (!errors.empty()) {
    std::string msg = "infeasible dataset spec:";
    for (const auto& e : errors) msg += " " + e + ";";
    throw ConfigError(msg);
  }
}

std::string keyboard_neighbours(char c) {
  const char lc = lower(c);
  std::string out;
  for (std::size_t r = 0; r < kRows.size(); ++r) {
    const auto col = kRows[r].find(lc);
    if (col == std::string_view::npos) continue;
    const int x = 2 * static_cast<int>(col) + kRowShift[r];
    for (int dr = -1; dr <= 1; ++dr) {
      const int rr = static_cast<int>(r) + dr;
      if (rr < 0 || rr >= static_cast<int>(kRows.size())) continue;
      // Digits and letters do not mix: the number row only neighbours itself.
      if ((rr == 0) != (r == 0)) continue;
      for (std::size_t k = 0; k < kRows[rr].size(); ++k) {
        const int xx = 2 * static_cast<int>(k) + kRowShift[rr];
        if (rr == static_cast<int>(r) ? std::abs(xx - x) == 2 : std::abs(xx - x) == 1) out.push_back(kRows[rr][k]);
      }
    }
    break;
  }
  return out;
}

std::optional<std::string> phonetic_swap(const std::string& s, Rng& rng) {
  std::string low(s.size(), ' ');
  std::transform(s.begin(), s.end(), low.begin(), lower);
  std::vector<std::tuple<std::size_t, std::size_t, std::string>> options;  // pos, len, replacement
  for (const auto& [x, y] : kPhonetic) {
    for (const auto& [from, to] : {std::pair{std::string(x), std::string(y)}, std::pair{std::string(y), std::string(x)}}) {
      for (auto pos = low.find(from); pos != std::string::npos; pos = low.find(from, pos + 1))
        options.emplace_back(pos, from.size(), to);
    }
  }
  if (options.empty()) return std::nullopt;
  const auto& [pos, len, to] = options[uniform(rng, options.size())];
  std::string repl = to;
  if (!repl.empty()) repl[0] = match_case(s[pos], repl[0]);
  return s.substr(0, pos) + repl + s.substr(pos + len);
}

std::string apply_edit(const std::string& value, Edit e, bool numeric, Rng& rng) {
  if (value.empty()) return value;
  auto fresh = [&] { return numeric ? random_digit(rng) : random_letter(rng); };
  std::string s = value;
  const std::size_t pos = uniform(rng, s.size());
  switch (e) {
    case Edit::Insert:
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(uniform(rng, s.size() + 1)), fresh());
      break;
    case Edit::Delete:
      s.erase(pos, 1);
      break;
    case Edit::Substitute: {
      char c = fresh();
      while (lower(c) == lower(s[pos]) && s.size() > 0) c = fresh();
      s[pos] = match_case(s[pos], c);
      break;
    }
    case Edit::KeyboardSubstitute: {
      const std::string n = keyboard_neighbours(s[pos]);
      if (n.empty()) return apply_edit(value, Edit::Substitute, numeric, rng);
      s[pos] = match_case(s[pos], n[uniform(rng, n.size())]);
      break;
    }
    case Edit::PhoneticSwap: {
      auto swapped = numeric ? std::nullopt : phonetic_swap(s, rng);
      if (!swapped) return apply_edit(value, Edit::KeyboardSubstitute, numeric, rng);
      s = *swapped;
      break;
    }
    case Edit::Omit:
      s.clear();
      break;
  }
  return s;
}

RawRecord corrupt_record(const RawRecord& r, Rng& rng, const SyntheticDatasetSpec& spec, CorruptionLog* log) {
  RawRecord out = r;
  std::array<std::size_t, 8> order;
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  unsigned errors = 0;
  for (std::size_t i : order) {
    if (errors >= spec.max_errors) break;
    std::string& v = field(out, i);
    if (v.empty() || !chance(rng, spec.corruption)) continue;
    const bool numeric = numeric_field(i);
    static constexpr std::array<Edit, 6> kTextEdits = {Edit::Insert, Edit::Delete, Edit::Substitute,
                                                       Edit::KeyboardSubstitute, Edit::PhoneticSwap, Edit::Omit};
    static constexpr std::array<Edit, 4> kNumberEdits = {Edit::Substitute, Edit::KeyboardSubstitute, Edit::Delete,
                                                         Edit::Omit};
    const Edit e = numeric ? kNumberEdits[uniform(rng, kNumberEdits.size())] : kTextEdits[uniform(rng, kTextEdits.size())];
    v = apply_edit(v, e, numeric, rng);
    ++errors;
    if (log) log->edits.emplace_back(std::string(kColumns[i]), e);
  }
  return out;
}

RawRecord shuffle_group(const RawRecord& r, Rng& rng) {
  RawRecord out = r;
  switch (uniform(rng, 3)) {
    case 0:
      std::swap(out.first_name, out.last_name);
      break;
    case 1:
      std::swap(out.birth_day, out.birth_month);
      break;
    default:
      if (out.postcode.size() >= 2) {
        const std::size_t i = uniform(rng, out.postcode.size() - 1);
        std::swap(out.postcode[i], out.postcode[i + 1]);
      }
      break;
  }
  return out;
}

RawRecord random_person(Rng& rng) {
  static const auto first_w = zipf_weights<kFirstNames.size()>(0.7);
  static const auto last_w = zipf_weights<kSurnames.size()>(0.7);
  static const auto place_w = zipf_weights<kPlaces.size()>(0.9);
  RawRecord r;
  r.first_name = kFirstNames[pick(rng, first_w)];
  r.last_name = kSurnames[pick(rng, last_w)];
  // Birth name: a different surname, as after a marriage.
  do {
    r.birth_name = kSurnames[pick(rng, last_w)];
  } while (r.birth_name == r.last_name);
  const Place& p = kPlaces[pick(rng, place_w)];
  r.city = p.city;
  r.postcode = p.postcode_prefix;
  while (r.postcode.size() < 5) r.postcode.push_back(random_digit(rng));
  const int year = kFirstYear + static_cast<int>(pick(rng, year_weights()));
  // Uniform over the days of the year.
  const int leap = days_in_month(year, 2) == 29 ? 1 : 0;
  int doy = static_cast<int>(uniform(rng, static_cast<std::size_t>(365 + leap)));
  int month = 1;
  while (doy >= days_in_month(year, month)) doy -= days_in_month(year, month++);
  r.birth_year = std::to_string(year);
  r.birth_month = std::to_string(month);
  r.birth_day = std::to_string(doy + 1);
  return r;
}

SyntheticData synthesize(const SyntheticDatasetSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const std::size_t n = spec.records;
  const auto shared = static_cast<std::size_t>(std::llround(spec.overlap * static_cast<double>(n)));
  const std::size_t originals = 2 * n - shared;

  // Distinct people: no two share name and date of birth.
  std::vector<RawRecord> people;
  std::set<std::tuple<std::string, std::string, std::string, std::string, std::string>> keys;
  while (people.size() < originals) {
    RawRecord p = random_person(rng);
    if (keys.emplace(p.first_name, p.last_name, p.birth_year, p.birth_month, p.birth_day).second)
      people.push_back(std::move(p));
  }

  auto duplicate = [&](const RawRecord& p) {
    RawRecord d = p;
    if (chance(rng, spec.birth_name_omission)) d.birth_name.clear();
    d = corrupt_record(d, rng, spec);
    if (chance(rng, spec.shuffle_rate)) d = shuffle_group(d, rng);
    return d;
  };

  // People [0, shared) appear in both sets, the rest in one of them.
  std::vector<std::pair<RawRecord, std::optional<std::size_t>>> a, b;  // record, entity if shared
  for (std::size_t i = 0; i < shared; ++i) {
    a.emplace_back(duplicate(people[i]), i);
    b.emplace_back(duplicate(people[i]), i);
  }
  for (std::size_t i = shared; i < n; ++i) a.emplace_back(duplicate(people[i]), std::nullopt);
  for (std::size_t i = n; i < originals; ++i) b.emplace_back(duplicate(people[i]), std::nullopt);
  std::shuffle(a.begin(), a.end(), rng);
  std::shuffle(b.begin(), b.end(), rng);

  SyntheticData out;
  std::vector<std::size_t> b_row(shared);
  for (std::size_t j = 0; j < b.size(); ++j)
    if (b[j].second) b_row[*b[j].second] = j;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.a.push_back(a[i].first);
    if (a[i].second) out.truth.emplace_back(i, b_row[*a[i].second]);
  }
  for (auto& [r, e] : b) out.b.push_back(std::move(r));
  return out;
}

// ------------------------------------------------------------------ files

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back().push_back(c);
    }
  }
  if (quoted) throw EncodingError("unterminated quote in record file");
  return out;
}

namespace {

std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string q = "\"";
  for (char c : v) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  return q + "\"";
}

}  // namespace

void write_records(std::ostream& out, const std::vector<RawRecord>& rows) {
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
  out << "\n";
  for (const auto& r : rows) {
    RawRecord copy = r;
    for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << csv_field(field(copy, i));
    out << "\n";
  }
}

std::vector<RawRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw EncodingError("record file is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  std::array<std::optional<std::size_t>, 8> column;
  for (std::size_t c = 0; c < header.size(); ++c)
    for (std::size_t k = 0; k < kColumns.size(); ++k)
      if (header[c] == kColumns[k]) column[k] = c;
  for (std::size_t k = 0; k < kColumns.size(); ++k)
    if (!column[k]) throw EncodingError("record file lacks column " + std::string(kColumns[k]));

  std::vector<RawRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw EncodingError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                          " fields, header has " + std::to_string(header.size()));
    RawRecord r;
    for (std::size_t k = 0; k < kColumns.size(); ++k) field(r, k) = cells[*column[k]];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_records(const std::filesystem::path& p, const std::vector<RawRecord>& rows) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  write_records(out, rows);
}

std::vector<RawRecord> read_records(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return read_records(in);
}

void write_truth(const std::filesystem::path& p, const std::vector<std::pair<std::size_t, std::size_t>>& truth) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << "a_row,b_row\n";
  for (const auto& [a, b] : truth) out << a << "," << b << "\n";
}

std::vector<std::pair<std::size_t, std::size_t>> read_truth(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 2) throw EncodingError("truth file line must be a_row,b_row");
    out.emplace_back(std::stoull(cells[0]), std::stoull(cells[1]));
  }
  return out;
}

}  // namespace pprl::synth
