import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
import warnings
warnings.filterwarnings('ignore')
from sklearn.model_selection import train_test_split
from sklearn.pipeline import make_pipeline
from sklearn.linear_model import Ridge
from sklearn.preprocessing import PolynomialFeatures
from sklearn.preprocessing import StandardScaler
from sklearn.metrics import mean_squared_error

df = pd.read_csv('data/housing.csv')

sns.pairplot(df.sample(100))
plt.show()

plt.figure(figsize=(8, 4))
sns.boxplot(x='target', y='area', data=df)
plt.xticks(rotation=45)
plt.show()

print(df.shape)
df.head()
df.info()
df.describe()

missing = df.isnull().mean() * 100
missing = missing.sort_values(ascending=False)
print(missing.head(10))

df.hist(bins=30, figsize=(12, 8))
plt.tight_layout()
plt.show()

def summarize(frame):
    return frame.describe().T

summary = summarize(df)
print(summary)

cat_cols = df.select_dtypes(include='object').columns
for c in cat_cols:
    print(df[c].value_counts().head())

df['target'].value_counts()
sns.countplot(x='target', data=df)
plt.show()

df = df.dropna(subset=['target'])
df['zone'] = df['zone'].fillna(df['zone'].mode()[0])
df['area'] = df['area'].fillna(df['area'].median())
df['rooms'] = df['rooms'].fillna(df['rooms'].median())
df['age'] = df['age'].fillna(df['age'].median())

X = df.drop('target', axis=1)
y = df['target']
X = pd.get_dummies(X)
X_train, X_test, y_train, y_test = train_test_split(X, y, test_size=0.2, random_state=33)
print(X_train.shape, X_test.shape)

pipe = make_pipeline(StandardScaler(), PolynomialFeatures(), Ridge())
pipe.fit(X_train, y_train)
preds = pipe.predict(X_test)
print('rmse', np.sqrt(mean_squared_error(y_test, preds)))

submission = pd.DataFrame({'id': range(len(preds)), 'prediction': preds})
submission.to_csv('submission.csv', index=False)
print(submission.head())
