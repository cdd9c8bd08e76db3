# Pydantic value objects, requests and reports
