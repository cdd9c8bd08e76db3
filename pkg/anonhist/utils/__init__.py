# Errors, random streams and serialization
