"""Regenerates porter_pairs.tsv from NLTK's reference Porter stemmer.

Run: python3 gen_porter_fixture.py > porter_pairs.tsv
Uses the original-algorithm mode (no NLTK extensions).
"""
from nltk.stem.porter import PorterStemmer

WORDS = """
going caresses ponies ties caress cats feed agreed plastered bled motoring
sing conflated troubled sized hopping tanned falling hissing fizzed failing
filing happy sky relational conditional rational valenci hesitanci digitizer
conformabli radicalli differentli vileli analogousli vietnamization
predication operator feudalism decisiveness hopefulness callousness
formaliti sensitiviti sensibiliti triplicate formative formalize
electriciti electrical hopeful goodness revival allowance inference airliner
gyroscopic adjustable defensible irritant replacement adjustment dependent
adoption homologou communism activate angulariti homologous effective
bowdlerize probate rate cease controll roll generalizations oscillators
security secure authentication authorization authorized credentials
encryption encrypted vulnerability vulnerabilities tokens microservices
gateway certificates password passwords ssl sso oauth validation
""".split()

stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
print("# word\tstem  (nltk PorterStemmer, ORIGINAL_ALGORITHM)")
for w in WORDS:
    print(f"{w}\t{stemmer.stem(w)}")
