"""Hand-built NQ-style cases used by the taxonomy and acceptance tests."""

from spancorrect.spans import Annotation, MRCExample, Prediction, locate


def example_with_answer(ex_id: str, question: str, context: str, answer: str) -> MRCExample:
    span = locate(answer, context)
    return MRCExample(
        id=ex_id,
        question=question,
        context=context,
        ground_truths=(Annotation.from_context(context, [span]),),
    )


def located_prediction(ex: MRCExample, text: str) -> Prediction:
    return Prediction(
        example_id=ex.id,
        text=text,
        span=locate(text, ex.context, hint=ex.ground_truths[0].spans[0]),
    )


# A reader that drops the tail of a list-style answer.
DANCE = example_with_answer(
    "dance",
    "who won the king of dance season 2",
    "Title Winner : LAAB Crew From Team Sherif , 1st Runner-up : ADS kids "
    "From Team Sherif , 2nd Runner-up : Bipin and Princy From Team Jeffery",
    "LAAB Crew From Team Sherif",
)
DANCE_READER = "LAAB Crew"

# A reader that copies a whole clause around a short answer.
FATS = example_with_answer(
    "fats",
    "unsaturated fats are comprised of lipids that contain",
    "An unsaturated fat is a fat or fatty acid in which there is at least "
    "one double bond within the fatty acid chain. A fatty acid chain is "
    "monounsaturated if it contains one double bond.",
    "at least one double bond",
)
FATS_READER = (
    "An unsaturated fat is a fat or fatty acid in which there is at least one double bond"
)

# A reader whose span straddles the gold span.
ALGAE = example_with_answer(
    "algae",
    "what is most likely cause of algal blooms",
    "colloquially as red tides. Freshwater algal blooms are the result of "
    "an excess of nutrients , particularly some phosphates. The excess of "
    "nutrients may originate from fertilizers that are applied to land for "
    "agricultural or recreational purposes.",
    "an excess of nutrients , particularly some phosphates",
)
ALGAE_READER = "Freshwater algal blooms are the result of an excess of nutrients"

# Corrector-introduced errors: the reader was exactly right, the corrector
# replaced the answer with a partial match.
CONES = example_with_answer(
    "cones",
    "where are the cones in the eye located",
    "Cone cells, or cones, are one of three types of photoreceptor cells "
    "in the retina of mammalian eyes (e.g. the human eye).",
    "in the retina",
)
CONES_READER = "in the retina"
CONES_CORRECTOR = "retina"

SINGER = example_with_answer(
    "singer",
    "who sang the theme song to step by step",
    "Jesse Frederick James Conaway (born 1948), known professionally as "
    "Jesse Frederick, is an American film and television composer and singer.",
    "Jesse Frederick James Conaway",
)
SINGER_READER = "Jesse Frederick James Conaway"
SINGER_CORRECTOR = (
    "Jesse Frederick James Conaway (born 1948), known professionally as Jesse Frederick"
)


def multi_span_only_example() -> MRCExample:
    """A gold answer made of non-contiguous items with no contiguous variant."""
    context = "the prize winners were willow , falcon and ember that year ."
    spans = [
        locate("willow", context),
        locate("falcon", context),
        locate("ember", context),
    ]
    return MRCExample(
        id="multi-only",
        question="who were the prize winners",
        context=context,
        ground_truths=(Annotation.from_context(context, spans),),
    )
