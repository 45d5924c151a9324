from hypothesis import settings

settings.register_profile("spancorrect", deadline=None, max_examples=100)
settings.load_profile("spancorrect")
