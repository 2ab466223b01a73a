#!/usr/bin/env python3
"""Regenerates the word lists under data/.

Sources (not vendored; install them to rerun this script):
  wordfreq      English word frequencies (CC-BY-SA 4.0)
  english-words GCIDE headword list (used only as a membership filter)
  lemminflect   part-of-speech classes and inflections

    pip install wordfreq english-words lemminflect
    python3 tools/data/build_data.py data
"""

import argparse
import gzip
import importlib.resources
import pickle
import re
import sys
from collections import defaultdict
from pathlib import Path

import wordfreq

ALPHA = re.compile(r"[a-z]+")

# Function words short enough to fall under the minimum word length; the only
# short entries allowed in the segmentation lexicon.
SHORT_WORDS = "a i to of in is it on be as at he by my or we an so me if up do no us go am".split()

STOPWORDS = """
a about above after again against all am an and any are as at be because been before being below
between both but by can could did do does doing down during each few for from further had has have
having he her here hers herself him himself his how i if in into is it its itself just me more most
my myself no nor not now of off on once only or other our ours ourselves out over own same she
should so some such than that the their theirs them themselves then there these they this those
through to too under until up very was we were what when where which while who whom why will with
would you your yours yourself yourselves also may might must shall upon yet ever every
""".split()

FIRSTNAMES = """
james john robert michael william david richard joseph thomas charles christopher daniel matthew
anthony mark donald steven paul andrew joshua kenneth kevin brian george timothy ronald edward jason
jeffrey ryan jacob gary nicholas eric jonathan stephen larry justin scott brandon benjamin samuel
gregory alexander frank patrick raymond jack dennis jerry tyler aaron jose adam nathan henry douglas
zachary peter kyle ethan walter noah jeremy christian keith roger terry gerald harold sean austin carl
arthur lawrence dylan jesse jordan bryan billy joe bruce gabriel logan albert willie alan juan wayne
elijah randy roy vincent ralph eugene russell bobby mason philip louis harry johnny howard fred
eddie ben bob tom jim mike dave steve tony nick sam max alex leo luke jake chris matt danny charlie
mary patricia jennifer linda elizabeth barbara susan jessica sarah karen lisa nancy betty margaret
sandra ashley kimberly emily donna michelle carol amanda dorothy melissa deborah stephanie rebecca
sharon laura cynthia kathleen amy angela shirley anna brenda pamela emma nicole helen samantha
katherine christine debra rachel carolyn janet catherine maria heather diane ruth julie olivia joyce
virginia victoria kelly lauren christina joan evelyn judith megan andrea cheryl hannah jacqueline
martha gloria teresa ann sara madison frances kathryn janice jean abigail alice judy sophia grace
denise amber doris marilyn danielle beverly isabella theresa diana natalie brittany charlotte marie
kayla alexis lori tatiana jenny kate katie lucy molly rose ella chloe zoe lily mia ava jane annie
""".split()

GEO = """
afghanistan albania algeria argentina armenia australia austria bangladesh belgium bolivia brazil
bulgaria cambodia cameroon canada chile china colombia croatia cuba cyprus denmark ecuador egypt
england estonia ethiopia finland france georgia germany ghana greece guatemala haiti honduras hungary
iceland india indonesia iran iraq ireland israel italy jamaica japan jordan kenya korea kuwait laos
latvia lebanon libya lithuania malaysia mexico mongolia morocco nepal netherlands nigeria norway
pakistan panama paraguay peru philippines poland portugal qatar romania russia rwanda scotland senegal
serbia singapore slovakia slovenia somalia spain sudan sweden switzerland syria taiwan tanzania
thailand tunisia turkey uganda ukraine uruguay venezuela vietnam wales yemen zambia zimbabwe america
africa asia europe london paris berlin madrid rome vienna prague warsaw moscow dublin lisbon athens
amsterdam brussels stockholm oslo helsinki copenhagen budapest istanbul cairo lagos nairobi tokyo
beijing shanghai seoul delhi mumbai bangkok jakarta manila sydney melbourne toronto montreal
vancouver chicago boston houston dallas denver seattle atlanta miami phoenix detroit portland
austin nashville memphis orlando tampa baltimore philadelphia pittsburgh cleveland cincinnati
brooklyn manhattan texas california florida ohio virginia carolina arizona nevada oregon alaska
hawaii montana kansas iowa utah idaho maine vermont kentucky tennessee alabama louisiana michigan
wisconsin minnesota missouri oklahoma arkansas indiana illinois jersey york hollywood vegas dakota
""".split()

DETERMINERS = "the this that every each some any another their our your his her its".split()
PREPOSITIONS = "with under over near behind beside above below across into from without through after before".split()
CONJUNCTIONS = "and but while because".split()
AUXILIARIES = "will can must should may might could would".split()
PRONOUNS = "she they you".split()


def gcide_words():
    with importlib.resources.files("english_words").joinpath("data/gcide_alpha_lower.pickle").open("rb") as f:
        return pickle.load(f)


def lemma_known(word, gcide):
    if word in gcide:
        return True
    rules = [("s", ""), ("es", ""), ("ies", "y"), ("ed", ""), ("ed", "e"), ("ied", "y"), ("ing", ""),
             ("ing", "e"), ("ly", ""), ("er", ""), ("er", "e"), ("est", ""), ("est", "e")]
    for suffix, repl in rules:
        if word.endswith(suffix) and len(word) - len(suffix) >= 3:
            base = word[: -len(suffix)] + repl
            if base in gcide:
                return True
            if suffix in ("ed", "ing", "er", "est") and base[-1] == base[-2] and base[:-1] in gcide:
                return True
    return False


def frequency_list():
    """(word, frequency) for alphabetic English words, most frequent first."""
    out = []
    for word in wordfreq.iter_wordlist("en", wordlist="large"):
        if ALPHA.fullmatch(word):
            out.append((word, wordfreq.word_frequency(word, "en", wordlist="large")))
    return out


def pos_classes():
    """lemma -> {pos: [forms]} from lemminflect's inflection table."""
    path = importlib.resources.files("lemminflect").joinpath("resources/infl_lu.csv.gz")
    classes = defaultdict(dict)
    with path.open("rb") as raw, gzip.open(raw, "rt") as f:
        for line in f:
            parts = line.rstrip("\n").split(",")
            lemma, pos = parts[0], parts[1]
            classes[lemma][pos] = parts[2:]
    return classes


def write_lines(path, words):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(w + "\n" for w in words))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=Path)
    ap.add_argument("--lexicon-size", type=int, default=20000)
    args = ap.parse_args()
    out = args.out

    gcide = gcide_words()
    freqs = frequency_list()
    freq = dict(freqs)
    stop = set(STOPWORDS)

    english = []
    for word, _ in freqs[: args.lexicon_size]:
        if len(word) >= 3 and lemma_known(word, gcide):
            english.append(word)
    english_set = set(english) | set(SHORT_WORDS)

    write_lines(out / "dicts/english.txt", sorted(english_set))
    write_lines(out / "dicts/firstnames.txt", sorted(set(FIRSTNAMES)))
    write_lines(out / "dicts/geo.txt", sorted(set(GEO)))
    unigram_words = sorted(english_set | {w for w in FIRSTNAMES + GEO if w in freq})
    with (out / "dicts/unigrams.tsv").open("w") as f:
        f.write("# word<TAB>count per billion tokens\n")
        for w in unigram_words:
            f.write(f"{w}\t{max(1, round(freq[w] * 1e9))}\n")

    write_lines(out / "stopwords.txt", sorted(stop))

    by_freq = [w for w, _ in freqs if w in english_set and 4 <= len(w) <= 9 and w not in stop]
    write_lines(out / "wordlists/diceware.txt", sorted(by_freq[:7776]))
    write_lines(out / "wordlists/six.txt", ["apple", "river", "stone", "cloud", "tiger", "maple"])

    classes = pos_classes()
    tagged = defaultdict(list)

    def first_form(field):
        form = field.split("/")[0]
        return form if ALPHA.fullmatch(form) else ""

    for word, f in freqs[:40000]:
        if len(word) < 3 or word in stop or not lemma_known(word, gcide):
            continue
        entry = classes.get(word, {})
        # Ambiguous lemmas keep a class only when its inflections are common
        # enough, so "good" is not a noun and "one" not a verb.
        ambiguous = len(entry) > 1
        noun = verb = False
        if "noun" in entry:
            plural = first_form(entry["noun"][0]) if entry["noun"] else ""
            if plural and plural != word and (not ambiguous or freq.get(plural, 0.0) >= 0.08 * f):
                noun = True
                tagged["N"].append((word, f))
                tagged["NS"].append((plural, freq.get(plural, 0.0)))
        if "verb" in entry and len(entry["verb"]) >= 4:
            past, _, gerund, third = (first_form(x) for x in entry["verb"][:4])
            if past and (not ambiguous or freq.get(past, 0.0) + freq.get(gerund, 0.0) >= 0.08 * f):
                verb = True
                tagged["V"].append((word, f))
                for tag, form in (("VD", past), ("VG", gerund), ("VZ", third)):
                    if form:
                        tagged[tag].append((form, freq.get(form, 0.0)))
        if "adj" in entry and not noun and not verb:
            tagged["A"].append((word, f))
        if "adv" in entry and word.endswith("ly"):
            tagged["R"].append((word, f))

    numerals = set("one two three four five six seven eight nine ten".split())
    verb_forms = {w for tag in ("VD", "VG", "VZ") for w, _ in tagged[tag]}
    tagged["A"] = [(w, f) for w, f in tagged["A"] if w not in verb_forms and w not in numerals]

    def top(tag, n):
        seen, words = set(), []
        for w, f in sorted(tagged[tag], key=lambda x: -x[1]):
            if f > 0 and w not in seen and w not in stop:
                seen.add(w)
                words.append((w, f))
        return words[:n]

    # Desk-corpus lexicon: word, class, relative frequency.
    limits = {"N": 5000, "NS": 2500, "V": 1500, "VD": 1500, "VG": 800, "VZ": 800, "A": 2500, "R": 500}
    (out / "desk").mkdir(parents=True, exist_ok=True)
    with (out / "desk/lexicon.tsv").open("w") as f:
        f.write("# word<TAB>class<TAB>frequency\n")
        for tag, n in limits.items():
            for w, fr in top(tag, n):
                f.write(f"{w}\t{tag}\t{fr:.6g}\n")
        for tag, words in (("DET", DETERMINERS), ("PREP", PREPOSITIONS), ("CONJ", CONJUNCTIONS),
                           ("AUX", AUXILIARIES), ("PRON", PRONOUNS)):
            for w in words:
                f.write(f"{w}\t{tag}\t{freq.get(w, 1e-6):.6g}\n")
        for w in FIRSTNAMES[:120]:
            f.write(f"{w}\tNAME\t{freq.get(w, 1e-6):.6g}\n")

    # TemplateDice wordlists: open classes of moderate size and small closed
    # classes, so long templates add little capacity.
    tmpl = out / "templates"
    write_lines(tmpl / "NOUN.txt", [w for w, _ in top("N", 1200)])
    write_lines(tmpl / "NOUNS.txt", [w for w, _ in top("NS", 600)])
    write_lines(tmpl / "ADJ.txt", [w for w, _ in top("A", 600)])
    write_lines(tmpl / "VERB.txt", [w for w, _ in top("V", 400)])
    write_lines(tmpl / "VERBED.txt", [w for w, _ in top("VD", 400)])
    write_lines(tmpl / "ADV.txt", [w for w, _ in top("R", 150)])
    write_lines(tmpl / "DET.txt", ["the", "this", "that", "every", "some"])
    write_lines(tmpl / "PREP.txt", ["with", "under", "over", "near", "behind", "beside"])
    write_lines(tmpl / "CONJ.txt", ["and", "but"])
    write_lines(tmpl / "AUX.txt", ["will", "can", "must"])
    write_lines(tmpl / "PRON.txt", ["she", "they", "you"])
    write_lines(tmpl / "THE.txt", ["the"])
    write_lines(tmpl / "AND.txt", ["and"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
