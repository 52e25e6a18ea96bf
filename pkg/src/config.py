import os
from pathlib import Path
from dotenv import load_dotenv

# Cargar variables del .env si existe
load_dotenv(Path(__file__).resolve().parent.parent / ".env")


class Config:
    """Configuración centralizada para la librería y el CLI `lmab`."""

    # Reproducibilidad
    # Usamos os.getenv para leer variables de entorno, con valores por defecto seguros
    SEED = int(os.getenv("LMAB_SEED", 42))

    # Evaluación de políticas (episodios Monte Carlo, stream de semilla separado)
    EVAL_EPISODES = int(os.getenv("LMAB_EVAL_EPISODES", 10_000))

    # Salidas (CSV de barridos, reportes JSON)
    OUTPUT_DIR = os.getenv("LMAB_OUTPUT_DIR", "data/runs")

    # Guardas de tamaño (escala de escritorio)
    ENUMERATION_GUARD = int(os.getenv("LMAB_ENUMERATION_GUARD", 10_000_000))
    PLAN_STATE_GUARD = int(os.getenv("LMAB_PLAN_STATE_GUARD", 1_000_000))
    TENSOR_GUARD = int(os.getenv("LMAB_TENSOR_GUARD", 100_000_000))

    # Logging
    LOG_LEVEL = os.getenv("LMAB_LOG_LEVEL", "INFO")
