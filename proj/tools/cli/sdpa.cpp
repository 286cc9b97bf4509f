#include "sdpa.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include <refine_sdo/error.hpp>

namespace refine_sdo::cli {

namespace {

struct Token {
    std::string text;
    int line;
};

bool is_comment(const std::string& line)
{
    const auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == '*' || line[pos] == '"';
}

std::vector<Token> split_line(std::string line, int number)
{
    for (char& c : line)
        if (c == ',' || c == '{' || c == '}' || c == '(' || c == ')' || c == '\r' || c == '\t')
            c = ' ';
    std::vector<Token> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok)
        out.push_back({tok, number});
    return out;
}

long parse_int(const Token& t, const char* what)
{
    long v = 0;
    const char* end = t.text.data() + t.text.size();
    auto [p, ec] = std::from_chars(t.text.data(), end, v);
    if (ec != std::errc() || p != end)
        throw ParseError(ErrorKind::ParseError, t.line, fmt::format("expected an integer {}, found '{}'", what, t.text));
    return v;
}

double parse_real(const Token& t, const char* what)
{
    std::string s = t.text;
    for (char& c : s)
        if (c == 'D' || c == 'd')
            c = 'e';
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v))
        throw ParseError(ErrorKind::ParseError, t.line, fmt::format("expected a real {}, found '{}'", what, t.text));
    return v;
}

struct BlockSlot {
    int first;    // index of the first stored block
    int size;     // |n_j|
    bool diagonal;
};

} // namespace

SdoProblem parse_sdpa(const std::string& text, Form form)
{
    std::vector<std::vector<Token>> lines;
    {
        std::istringstream in(text);
        std::string line;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (is_comment(line))
                continue;
            auto toks = split_line(line, number);
            if (!toks.empty())
                lines.push_back(std::move(toks));
        }
    }
    const int last_line = lines.empty() ? 1 : lines.back().front().line;
    std::size_t li = 0;

    if (li >= lines.size())
        throw ParseError(ErrorKind::ParseError, 1, "missing number of constraints");
    const long m = parse_int(lines[li][0], "for the number of constraints");
    if (m < 0)
        throw ParseError(ErrorKind::ParseError, lines[li][0].line, "negative number of constraints");
    ++li;
    if (li >= lines.size())
        throw ParseError(ErrorKind::ParseError, last_line, "missing number of blocks");
    const long nblocks = parse_int(lines[li][0], "for the number of blocks");
    if (nblocks <= 0)
        throw ParseError(ErrorKind::ParseError, lines[li][0].line, "number of blocks must be positive");
    ++li;

    // Remaining header values may wrap across lines.
    std::vector<Token> stream;
    std::size_t need = static_cast<std::size_t>(nblocks + m);
    while (stream.size() < need && li < lines.size()) {
        for (auto& t : lines[li])
            stream.push_back(t);
        ++li;
    }
    if (stream.size() < need)
        throw ParseError(ErrorKind::ParseError, last_line, "missing block sizes or right-hand side");
    if (stream.size() > need)
        throw ParseError(ErrorKind::ParseError, stream[need].line, "unexpected extra value in header");

    Layout layout;
    std::vector<BlockSlot> slots;
    for (long j = 0; j < nblocks; ++j) {
        const long s = parse_int(stream[j], "block size");
        if (s == 0)
            throw ParseError(ErrorKind::ParseError, stream[j].line, "block size must be nonzero");
        BlockSlot slot{static_cast<int>(layout.size()), static_cast<int>(std::labs(s)), s < 0};
        if (slot.diagonal)
            layout.insert(layout.end(), slot.size, 1);
        else
            layout.push_back(slot.size);
        slots.push_back(slot);
    }
    Vec b(m);
    for (long i = 0; i < m; ++i)
        b(i) = parse_real(stream[nblocks + i], "in the right-hand side");

    std::vector<std::vector<Mat>> mats(m + 1);
    for (auto& blocks : mats)
        for (int n : layout)
            blocks.push_back(Mat::Zero(n, n));
    std::vector<std::map<std::tuple<int, int, int>, double>> seen(m + 1);

    for (; li < lines.size(); ++li) {
        const auto& toks = lines[li];
        const int ln = toks.front().line;
        if (toks.size() != 5)
            throw ParseError(ErrorKind::ParseError, ln, fmt::format("expected 5 fields in an entry, found {}", toks.size()));
        const long mat = parse_int(toks[0], "matrix number");
        const long blk = parse_int(toks[1], "block number");
        long i = parse_int(toks[2], "row index");
        long j = parse_int(toks[3], "column index");
        const double v = parse_real(toks[4], "entry value");
        if (mat < 0 || mat > m)
            throw ParseError(ErrorKind::IndexOutOfBlock, ln, fmt::format("matrix number {} outside 0..{}", mat, m));
        if (blk < 1 || blk > nblocks)
            throw ParseError(ErrorKind::IndexOutOfBlock, ln, fmt::format("block number {} outside 1..{}", blk, nblocks));
        const BlockSlot& slot = slots[blk - 1];
        if (i < 1 || j < 1 || i > slot.size || j > slot.size)
            throw ParseError(ErrorKind::IndexOutOfBlock, ln,
                             fmt::format("entry ({},{}) outside block {} of size {}", i, j, blk, slot.size));
        if (slot.diagonal && i != j)
            throw ParseError(ErrorKind::IndexOutOfBlock, ln,
                             fmt::format("off-diagonal entry ({},{}) in diagonal block {}", i, j, blk));
        if (i > j)
            std::swap(i, j);
        const auto key = std::make_tuple(static_cast<int>(blk), static_cast<int>(i), static_cast<int>(j));
        auto [it, inserted] = seen[mat].emplace(key, v);
        if (!inserted) {
            if (it->second != v)
                throw ParseError(ErrorKind::NonSymmetricDuplicate, ln,
                                 fmt::format("entry ({},{}) of matrix {} block {} given twice with different values",
                                             i, j, mat, blk));
            continue;
        }
        if (slot.diagonal) {
            mats[mat][slot.first + i - 1](0, 0) = v;
        } else {
            Mat& B = mats[mat][slot.first];
            B(i - 1, j - 1) = v;
            B(j - 1, i - 1) = v;
        }
    }

    SdoProblem p;
    p.form = form;
    p.C = SymMat(std::move(mats[0]));
    for (long i = 1; i <= m; ++i)
        p.A.push_back(SymMat(std::move(mats[i])));
    p.b = std::move(b);
    return p;
}

SdoProblem load_sdpa(const std::string& path, Form form)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::IoError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        fail(ErrorKind::IoError, "cannot read '" + path + "'");
    return parse_sdpa(buf.str(), form);
}

std::string emit_sdpa(const SdoProblem& prob)
{
    std::string out;
    const Layout& layout = prob.layout();
    out += fmt::format("{}\n{}\n", prob.m(), layout.size());
    for (std::size_t j = 0; j < layout.size(); ++j)
        out += fmt::format("{}{}", j ? " " : "", layout[j]);
    out += "\n";
    for (int i = 0; i < prob.m(); ++i)
        out += fmt::format("{}{:.17g}", i ? " " : "", prob.b(i));
    out += "\n";
    auto write = [&](int mat, const SymMat& a) {
        for (int blk = 0; blk < a.num_blocks(); ++blk) {
            const Mat& B = a.block(blk);
            for (int i = 0; i < B.rows(); ++i)
                for (int j = i; j < B.cols(); ++j)
                    if (B(i, j) != 0.0)
                        out += fmt::format("{} {} {} {} {:.17g}\n", mat, blk + 1, i + 1, j + 1, B(i, j));
        }
    };
    write(0, prob.C);
    for (int i = 0; i < prob.m(); ++i)
        write(i + 1, prob.A[i]);
    return out;
}

} // namespace refine_sdo::cli
