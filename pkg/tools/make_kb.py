"""Author the bundled evidence knowledge base and stamp its checksum.

Content is curated from public clinical guidelines and well-known
epidemiology; every summary cites its sources inline. Rerun after editing
the ENTRIES table below; the checksum is recomputed automatically.

Output: src/riskscope/assets/kb.json
"""

from __future__ import annotations

import json
from pathlib import Path

from riskscope.evidence import compute_checksum, load_kb, parse_entries

OUT = Path(__file__).resolve().parent.parent / "src" / "riskscope" / "assets" / "kb.json"

VERSION = "2026.08"

ADA = {
    "marker": "[1]",
    "title": "American Diabetes Association, Standards of Care in Diabetes: Classification and Diagnosis",
    "source_type": "guideline",
    "year": 2024,
    "locator": "Diabetes Care 47(Suppl. 1):S20-S42",
}
WHO_DIAG = {
    "marker": "[2]",
    "title": "World Health Organization, Definition and Diagnosis of Diabetes Mellitus and Intermediate Hyperglycaemia",
    "source_type": "guideline",
    "year": 2006,
    "locator": "WHO/NMH/CHP/CPM 06.1",
}

ENTRIES = [
    {
        "feature": "Glucose",
        "kind": "importance",
        "summary": (
            "Plasma glucose two hours after an oral glucose load is the single most "
            "direct indicator of impaired glucose regulation; diagnostic criteria for "
            "diabetes are defined on it [1]. Elevated post-load glucose predicts "
            "progression to type 2 diabetes years before fasting measures deteriorate [2]."
        ),
        "citations": [
            ADA,
            {
                "marker": "[2]",
                "title": "Unwin et al., Impaired glucose tolerance and impaired fasting glycaemia: the current status on definition and intervention",
                "source_type": "journal",
                "year": 2002,
                "locator": "Diabet Med 19(9):708-723",
            },
        ],
    },
    {
        "feature": "Glucose",
        "kind": "range",
        "summary": (
            "A two-hour post-load plasma glucose below 140 mg/dL is considered normal "
            "[1]. Values from 140 to 199 mg/dL indicate impaired glucose tolerance "
            "(pre-diabetes), and 200 mg/dL or above meets the diagnostic criterion for "
            "diabetes [1][2]."
        ),
        "citations": [ADA, WHO_DIAG],
        "range": {"normal": [70, 140], "diagnostic": [140, 200], "units": "mg/dL"},
    },
    {
        "feature": "BMI",
        "kind": "importance",
        "summary": (
            "Excess adiposity is the strongest modifiable risk factor for type 2 "
            "diabetes; risk rises steeply and continuously with body-mass index [1]. "
            "Cohort data show a many-fold higher incidence above 30 kg/m^2 compared "
            "with lean individuals [2]."
        ),
        "citations": [
            {
                "marker": "[1]",
                "title": "World Health Organization, Obesity: Preventing and Managing the Global Epidemic",
                "source_type": "guideline",
                "year": 2000,
                "locator": "WHO Technical Report Series 894",
            },
            {
                "marker": "[2]",
                "title": "Colditz et al., Weight gain as a risk factor for clinical diabetes mellitus in women",
                "source_type": "epidemiological",
                "year": 1995,
                "locator": "Ann Intern Med 122(7):481-486",
            },
        ],
    },
    {
        "feature": "BMI",
        "kind": "range",
        "summary": (
            "A body-mass index of 18.5 to 24.9 kg/m^2 is classified as the normal "
            "range [1]. The 25 to 29.9 kg/m^2 band is classified as overweight, with "
            "30 kg/m^2 and above defined as obesity, where metabolic risk rises "
            "sharply [1][2]."
        ),
        "citations": [
            {
                "marker": "[1]",
                "title": "World Health Organization, Obesity: Preventing and Managing the Global Epidemic",
                "source_type": "guideline",
                "year": 2000,
                "locator": "WHO Technical Report Series 894",
            },
            {
                "marker": "[2]",
                "title": "Prospective Studies Collaboration, Body-mass index and cause-specific mortality in 900 000 adults",
                "source_type": "systematic-review",
                "year": 2009,
                "locator": "Lancet 373(9669):1083-1096",
            },
        ],
        "range": {"normal": [18.5, 25], "diagnostic": [25, 30], "units": "kg/m^2"},
    },
    {
        "feature": "BloodPressure",
        "kind": "importance",
        "summary": (
            "Hypertension clusters with insulin resistance and roughly doubles the "
            "risk of incident type 2 diabetes [1]. Diastolic pressure is an "
            "independent predictor of diabetes onset in prospective cohorts [2]."
        ),
        "citations": [
            {
                "marker": "[1]",
                "title": "Emdin et al., Usual blood pressure and risk of new-onset diabetes: evidence from 4.1 million adults",
                "source_type": "journal",
                "year": 2015,
                "locator": "J Am Coll Cardiol 66(14):1552-1562",
            },
            {
                "marker": "[2]",
                "title": "Gress et al., Hypertension and antihypertensive therapy as risk factors for type 2 diabetes mellitus",
                "source_type": "epidemiological",
                "year": 2000,
                "locator": "N Engl J Med 342(13):905-912",
            },
        ],
    },
    {
        "feature": "BloodPressure",
        "kind": "range",
        "summary": (
            "Diastolic blood pressure between 60 and 80 mm Hg is considered normal "
            "[1]. Readings from 80 to 89 mm Hg fall in the elevated-to-stage-1 "
            "hypertension band, and 90 mm Hg or above meets the stage 2 criterion [1]."
        ),
        "citations": [
            {
                "marker": "[1]",
                "title": "Whelton et al., 2017 ACC/AHA Guideline for the Prevention, Detection, Evaluation, and Management of High Blood Pressure in Adults",
                "source_type": "guideline",
                "year": 2018,
                "locator": "Hypertension 71(6):e13-e115",
            }
        ],
        "range": {"normal": [60, 80], "diagnostic": [80, 90], "units": "mm Hg"},
    },
    {
        "feature": "Insulin",
        "kind": "importance",
        "summary": (
            "Elevated circulating insulin marks compensatory secretion against "
            "insulin resistance, the core defect preceding type 2 diabetes [1]. "
            "Hyperinsulinemia predicts conversion to diabetes independently of "
            "glucose levels [2]."
        ),
        "citations": [
            {
                "marker": "[1]",
                "title": "Kahn et al., Mechanisms linking obesity to insulin resistance and type 2 diabetes",
                "source_type": "journal",
                "year": 2006,
                "locator": "Nature 444(7121):840-846",
            },
            {
                "marker": "[2]",
                "title": "Dankner et al., Basal-state hyperinsulinemia in healthy normoglycemic adults is predictive of type 2 diabetes",
                "source_type": "epidemiological",
                "year": 2009,
                "locator": "Diabetes Care 32(8):1464-1466",
            },
        ],
    },
    {
        "feature": "Insulin",
        "kind": "range",
        "summary": (
            "Fasting serum insulin in healthy adults typically falls between 2 and "
            "25 uU/mL [1]. Values from 25 to 50 uU/mL indicate hyperinsulinemia "
            "consistent with significant insulin resistance [1][2]."
        ),
        "citations": [
            {
                "marker": "[1]",
                "title": "Burtis and Ashwood (eds.), Tietz Textbook of Clinical Chemistry, reference intervals for immunoreactive insulin",
                "source_type": "journal",
                "year": 2012,
                "locator": "5th ed., reference-interval appendix",
            },
            {
                "marker": "[2]",
                "title": "McAuley et al., Diagnosing insulin resistance in the general population",
                "source_type": "journal",
                "year": 2001,
                "locator": "Diabetes Care 24(3):460-464",
            },
        ],
        "range": {"normal": [2, 25], "diagnostic": [25, 50], "units": "uU/mL"},
    },
    {
        "feature": "SkinThickness",
        "kind": "importance",
        "summary": (
            "Triceps skinfold thickness is an anthropometric proxy for subcutaneous "
            "adiposity and correlates with insulin resistance [1]. It contributed "
            "independent predictive value in the cohort from which this dataset "
            "derives [2]."
        ),
        "citations": [
            {
                "marker": "[1]",
                "title": "Durnin and Womersley, Body fat assessed from total body density and its estimation from skinfold thickness",
                "source_type": "journal",
                "year": 1974,
                "locator": "Br J Nutr 32(1):77-97",
            },
            {
                "marker": "[2]",
                "title": "Knowler et al., Diabetes incidence and prevalence in Pima Indians: a 19-fold greater incidence than in Rochester, Minnesota",
                "source_type": "epidemiological",
                "year": 1978,
                "locator": "Am J Epidemiol 108(6):497-505",
            },
        ],
    },
    {
        "feature": "Pregnancies",
        "kind": "importance",
        "summary": (
            "Each pregnancy exposes the mother to transient insulin resistance, and "
            "gestational diabetes confers a roughly seven-fold higher risk of later "
            "type 2 diabetes [1]. Parity itself shows a graded association with "
            "diabetes incidence in high-risk populations [2]."
        ),
        "citations": [
            {
                "marker": "[1]",
                "title": "Bellamy et al., Type 2 diabetes mellitus after gestational diabetes: a systematic review and meta-analysis",
                "source_type": "systematic-review",
                "year": 2009,
                "locator": "Lancet 373(9677):1773-1779",
            },
            {
                "marker": "[2]",
                "title": "Charles et al., Gravidity, obesity, and non-insulin-dependent diabetes among Pima Indian women",
                "source_type": "epidemiological",
                "year": 1994,
                "locator": "Am J Med 97(3):250-255",
            },
        ],
    },
    {
        "feature": "DiabetesPedigreeFunction",
        "kind": "importance",
        "summary": (
            "The pedigree function summarizes familial diabetes history weighted by "
            "genetic closeness; family history is one of the strongest fixed risk "
            "factors, with first-degree relatives carrying about a three-fold risk "
            "[1]. The function was validated as a predictor in the original dataset "
            "publication [2]."
        ),
        "citations": [
            {
                "marker": "[1]",
                "title": "InterAct Consortium, The link between family history and risk of type 2 diabetes",
                "source_type": "epidemiological",
                "year": 2013,
                "locator": "Diabetologia 56(1):60-69",
            },
            {
                "marker": "[2]",
                "title": "Smith et al., Using the ADAP learning algorithm to forecast the onset of diabetes mellitus",
                "source_type": "journal",
                "year": 1988,
                "locator": "Proc Annu Symp Comput Appl Med Care:261-265",
            },
        ],
    },
    {
        "feature": "Age",
        "kind": "importance",
        "summary": (
            "Type 2 diabetes incidence rises with age as beta-cell function declines "
            "and insulin resistance accumulates; screening guidance keys on age "
            "thresholds for exactly this reason [1]."
        ),
        "citations": [ADA],
    },
]


def main() -> None:
    # Round-trip through the validator so the stored form and checksum match
    # what load_kb recomputes.
    normalized = [e.to_dict() for e in parse_entries(ENTRIES)]
    checksum = compute_checksum(VERSION, normalized)
    doc = {"version": VERSION, "checksum": checksum, "entries": normalized}
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(doc, indent=2) + "\n")
    kb = load_kb(OUT)
    kinds = {}
    for e in kb.entries:
        kinds.setdefault(e.kind, []).append(e.feature)
    print(f"wrote {OUT}: {len(kb)} entries, checksum {kb.checksum[:12]}...")
    for kind, feats in kinds.items():
        print(f"  {kind}: {', '.join(feats)}")


if __name__ == "__main__":
    main()
