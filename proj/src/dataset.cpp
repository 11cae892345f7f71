#include "scotti/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "scotti/error.hpp"
#include "scotti/rng.hpp"

namespace scotti {

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

long parse_long(const std::string& s, const std::string& what, int line_no) {
    const std::string t = trim(s);
    long v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw parse_error("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
    return v;
}

double parse_double(const std::string& s, int line_no) {
    const std::string t = trim(s);
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw parse_error("line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

struct RawData {
    int features = 0, classes = 0;
    std::vector<double> x;  // n × features
    std::vector<int> y;
};

RawData generate_blobs(int classes, int features, int count, std::uint64_t seed) {
    if (classes < 2) throw validation_error("synthetic-blobs needs at least 2 classes");
    if (features < 1) throw validation_error("synthetic-blobs needs at least 1 feature");
    if (count < 10) throw validation_error("synthetic-blobs needs at least 10 samples");

    Rng rng = Rng(seed).sub(1);
    RawData d;
    d.features = features;
    d.classes = classes;

    std::vector<double> means(static_cast<std::size_t>(classes) * features);
    for (double& m : means) m = rng.uniform(-2.0, 2.0);

    d.x.resize(static_cast<std::size_t>(count) * features);
    d.y.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const int label = i % classes;
        d.y[static_cast<std::size_t>(i)] = label;
        const double* m = means.data() + static_cast<std::size_t>(label) * features;
        double* row = d.x.data() + static_cast<std::size_t>(i) * features;
        for (int f = 0; f < features; ++f) row[f] = m[f] + rng.gauss();
    }
    return d;
}

RawData read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open dataset file '" + path + "'");

    std::string line;
    int line_no = 0;

    // header: n_samples,n_features,n_classes
    if (!std::getline(in, line)) throw parse_error("line 1: missing header");
    ++line_no;
    const std::vector<std::string> head = split_fields(line, ',');
    if (head.size() != 3)
        throw parse_error("line 1: header must be 'n_samples,n_features,n_classes'");
    const long n = parse_long(head[0], "sample count", 1);
    const long features = parse_long(head[1], "feature count", 1);
    const long classes = parse_long(head[2], "class count", 1);
    if (n == 0) throw validation_error("dataset '" + path + "' declares 0 samples");
    if (n < 0 || features < 1 || classes < 2)
        throw validation_error("dataset '" + path + "' has unusable header (" + trim(line) + ")");

    RawData d;
    d.features = static_cast<int>(features);
    d.classes = static_cast<int>(classes);
    d.x.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(features));
    d.y.resize(static_cast<std::size_t>(n));

    for (long i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw parse_error("line " + std::to_string(line_no + 1) + ": expected " +
                              std::to_string(n) + " samples, file ends after " +
                              std::to_string(i));
        ++line_no;
        const std::vector<std::string> f = split_fields(line, ',');
        if (f.size() != static_cast<std::size_t>(features) + 1)
            throw parse_error("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(features) + " features + label, got " +
                              std::to_string(f.size()) + " fields");
        double* row = d.x.data() + static_cast<std::size_t>(i) * features;
        for (long c = 0; c < features; ++c)
            row[c] = parse_double(f[static_cast<std::size_t>(c)], line_no);
        const long label = parse_long(f.back(), "label", line_no);
        if (label < 0 || label >= classes)
            throw validation_error("line " + std::to_string(line_no) + ": label " +
                                   std::to_string(label) + " outside [0," +
                                   std::to_string(classes) + ")");
        d.y[static_cast<std::size_t>(i)] = static_cast<int>(label);
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty())
            throw parse_error("line " + std::to_string(line_no) + ": data after declared " +
                              std::to_string(n) + " samples");
    }
    return d;
}

Split gather(const RawData& d, const std::vector<std::size_t>& idx, std::size_t begin,
             std::size_t count) {
    Split s;
    s.x = Tensor::zeros({count, static_cast<std::size_t>(d.features)});
    s.y.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t src = idx[begin + i];
        for (int f = 0; f < d.features; ++f)
            s.x.data[i * static_cast<std::size_t>(d.features) + static_cast<std::size_t>(f)] =
                d.x[src * static_cast<std::size_t>(d.features) + static_cast<std::size_t>(f)];
        s.y[i] = d.y[src];
    }
    return s;
}

}  // namespace

Dataset load_dataset(const std::string& spec, std::uint64_t seed) {
    const std::string s = trim(spec);
    RawData raw;
    if (s.rfind("file:", 0) == 0) {
        raw = read_file(s.substr(5));
    } else if (s == "synthetic-blobs") {
        raw = generate_blobs(4, 64, 2000, seed);
    } else if (s.rfind("synthetic-blobs{", 0) == 0 && s.back() == '}') {
        const std::string inner = s.substr(16, s.size() - 17);
        const std::vector<std::string> parts = split_fields(inner, ',');
        if (parts.size() != 3)
            throw config_error("dataset spec '" + spec +
                               "' wants synthetic-blobs{classes, features, count}");
        auto as_int = [&spec](const std::string& field) {
            const std::string t = trim(field);
            long v = 0;
            const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
            if (res.ec != std::errc() || res.ptr != t.data() + t.size())
                throw config_error("dataset spec '" + spec + "': bad integer '" + field + "'");
            return static_cast<int>(v);
        };
        raw = generate_blobs(as_int(parts[0]), as_int(parts[1]), as_int(parts[2]), seed);
    } else {
        throw config_error("unknown dataset spec '" + spec +
                           "' (use synthetic-blobs{...} or file:PATH)");
    }

    const std::size_t n = raw.y.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng shuffler = Rng(seed).sub(2);
    shuffler.shuffle(idx);

    const std::size_t n_train = n * 8 / 10;
    const std::size_t n_val = (n - n_train) / 2;
    const std::size_t n_test = n - n_train - n_val;
    if (n_train == 0 || n_val == 0 || n_test == 0)
        throw validation_error("dataset with " + std::to_string(n) +
                               " samples is too small for an 80/10/10 split");

    Dataset d;
    d.features = raw.features;
    d.classes = raw.classes;
    d.train = gather(raw, idx, 0, n_train);
    d.val = gather(raw, idx, n_train, n_val);
    d.test = gather(raw, idx, n_train + n_val, n_test);
    return d;
}

}  // namespace scotti
